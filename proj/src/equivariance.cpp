#include "modgrok/equivariance.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "modgrok/rng.hpp"

namespace mg {

QuadNetParams permute_weights(const QuadNetParams& theta, const PermTriple& sigma) {
    const int p = theta.p, h = theta.h;
    if (sigma.p() != p) throw std::invalid_argument("permutation modulus != theta modulus");
    QuadNetParams out = QuadNetParams::zeros(p, h);
    const std::size_t row_bytes = std::size_t(h) * sizeof(double);
    for (int j = 0; j < p; ++j) {
        std::memcpy(out.wt_row(sigma.s1[j]), theta.wt_row(j), row_bytes);
        std::memcpy(out.wt_row(p + sigma.s2[j]), theta.wt_row(p + j), row_bytes);
        std::memcpy(out.v_row(sigma.s3[j]), theta.v_row(j), row_bytes);
    }
    return out;
}

double max_abs_param_diff(const QuadNetParams& a, const QuadNetParams& b) {
    if (a.p != b.p || a.h != b.h) throw std::invalid_argument("shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.wt.size(); ++i) m = std::max(m, std::abs(a.wt[i] - b.wt[i]));
    for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

double check_forward_equivariance(const QuadNetParams& theta, const PermTriple& sigma,
                                  const std::vector<DataPoint>& pts) {
    QuadNetParams moved = permute_weights(theta, sigma);
    double dev = 0.0;
    for (const DataPoint& pt : pts) {
        double lhs = forward_reg(theta, pt.a, pt.b, pt.c);
        double rhs = forward_reg(moved, sigma.s1[pt.a], sigma.s2[pt.b], sigma.s3[pt.c]);
        dev = std::max(dev, std::abs(lhs - rhs));
    }
    return dev;
}

double check_gradient_equivariance(const QuadNetParams& theta, const PermTriple& sigma,
                                   const std::vector<DataPoint>& pts) {
    QuadNetParams moved = permute_weights(theta, sigma);
    double dev = 0.0;
    for (const DataPoint& pt : pts) {
        QuadNetParams g = grad_reg(theta, pt, 1.0);
        QuadNetParams g_moved = grad_reg(moved, DataPoint{sigma.s1[pt.a], sigma.s2[pt.b],
                                                          sigma.s3[pt.c], pt.label},
                                         1.0);
        dev = std::max(dev, max_abs_param_diff(permute_weights(g, sigma), g_moved));
    }
    return dev;
}

std::vector<double> check_training_equivariance(const TrainConfig& cfg, const PermTriple& sigma,
                                                const ModAddDataset& ds) {
    QuadNetParams theta0 = init_params(cfg.p, cfg.h, cfg);
    std::vector<QuadNetParams> traj_a;
    traj_a.reserve(std::size_t(cfg.steps) + 1);
    train(cfg, ds, ds, &theta0, [&](long, const QuadNetParams& t) { traj_a.push_back(t); });

    ModAddDataset moved_ds = apply_data_permutation(ds, sigma);
    QuadNetParams theta0_b = permute_weights(theta0, sigma);
    std::vector<double> dev(traj_a.size(), 0.0);
    train(cfg, moved_ds, moved_ds, &theta0_b, [&](long t, const QuadNetParams& th) {
        dev[std::size_t(t)] = max_abs_param_diff(permute_weights(traj_a[std::size_t(t)], sigma), th);
    });
    return dev;
}

std::vector<DataPoint> random_triples(int p, int count, std::uint64_t seed) {
    RngStream rs = stream(seed, "equi.points");
    std::vector<DataPoint> pts(count);
    for (DataPoint& pt : pts) {
        pt.a = int(rs.next_below(std::uint64_t(p)));
        pt.b = int(rs.next_below(std::uint64_t(p)));
        pt.c = int(rs.next_below(std::uint64_t(p)));
        pt.label = ((pt.a + pt.b) % p == pt.c) ? double(p) : 0.0;
    }
    return pts;
}

}  // namespace mg
