#include "modgrok/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <Eigen/Dense>
#include <json.hpp>

#include "modgrok/kernels.hpp"
#include "modgrok/rng.hpp"

namespace mg {

namespace {

// per-point active slices: u = W e_a + W e_{b+p}, s = u^2, w = V_row . u
struct Features {
    int h = 0;
    std::vector<double> s;  // n x h
    std::vector<double> w;  // n x h
};

Features make_features(const QuadNetParams& t, const std::vector<DataPoint>& pts, int v_row) {
    const int h = t.h;
    Features f;
    f.h = h;
    f.s.resize(pts.size() * h);
    f.w.resize(pts.size() * h);
    std::vector<double> u(h);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const DataPoint& pt = pts[i];
        kern::add(t.wt_row(pt.a), t.wt_row(pt.b + t.p), u.data(), h);
        kern::square(u.data(), &f.s[i * h], h);
        int row = v_row >= 0 ? v_row : pt.c;
        kern::mul(t.v_row(row), u.data(), &f.w[i * h], h);
    }
    return f;
}

KernelMatrix entk_from_features(const Features& f, const std::vector<DataPoint>& pts,
                                bool gate_c) {
    const int n = int(pts.size());
    const int h = f.h;
    KernelMatrix k = KernelMatrix::zeros(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double val = 0.0;
            if (!gate_c || pts[i].c == pts[j].c)
                val += kern::dot(&f.s[std::size_t(i) * h], &f.s[std::size_t(j) * h], h);
            int match = int(pts[i].a == pts[j].a) + int(pts[i].b == pts[j].b);
            if (match)
                val += 4.0 * match *
                       kern::dot(&f.w[std::size_t(i) * h], &f.w[std::size_t(j) * h], h);
            k.at(i, j) = val;
            k.at(j, i) = val;
        }
    }
    return k;
}

}  // namespace

KernelMatrix entk_regression(const QuadNetParams& theta, const std::vector<DataPoint>& pts) {
    return entk_from_features(make_features(theta, pts, -1), pts, true);
}

KernelMatrix entk_class_first_logit(const QuadNetParams& theta,
                                    const std::vector<DataPoint>& pts) {
    return entk_from_features(make_features(theta, pts, 0), pts, false);
}

KernelMatrix entk_for_task(const QuadNetParams& theta, const std::vector<DataPoint>& pts,
                           TaskKind task) {
    return task == TaskKind::Regression ? entk_regression(theta, pts)
                                        : entk_class_first_logit(theta, pts);
}

NtkMoments uniform_init_moments(double s_w, int h) {
    return NtkMoments{s_w * s_w / 3.0, 9.0 / 5.0, h};
}

double expected_L_entry(const DataPoint& x, const DataPoint& xp, const NtkMoments& mom) {
    if (x.c != xp.c) return 0.0;
    const double s4 = mom.sigma_w_sq * mom.sigma_w_sq;
    int match = int(x.a == xp.a) + int(x.b == xp.b);
    switch (match) {
        case 0: return 4.0 * s4;
        case 1: return (mom.kappa_w + 3.0) * s4;
        default: return (2.0 * mom.kappa_w + 6.0) * s4;
    }
}

KernelMatrix expected_L_matrix(const std::vector<DataPoint>& pts, const NtkMoments& mom) {
    const int n = int(pts.size());
    KernelMatrix k = KernelMatrix::zeros(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = mom.h * expected_L_entry(pts[i], pts[j], mom);
            k.at(i, j) = v;
            k.at(j, i) = v;
        }
    return k;
}

McEstimate mc_expected_L(const DataPoint& x, const DataPoint& xp, double s_w, long draws,
                         std::uint64_t seed) {
    RngStream rs = stream(seed, "mc.expectedL");
    double sum = 0.0, sum_sq = 0.0;
    const bool same_c = (x.c == xp.c);
    for (long d = 0; d < draws; ++d) {
        double wa = rs.next_uniform(-s_w, s_w);
        double wb = rs.next_uniform(-s_w, s_w);
        double wa2 = (xp.a == x.a) ? wa : rs.next_uniform(-s_w, s_w);
        double wb2 = (xp.b == x.b) ? wb : rs.next_uniform(-s_w, s_w);
        double u = wa + wb, u2 = wa2 + wb2;
        double val = same_c ? (u * u) * (u2 * u2) : 0.0;
        sum += val;
        sum_sq += val * val;
    }
    McEstimate est;
    est.draws = draws;
    est.mean = sum / double(draws);
    double var = std::max(0.0, sum_sq / double(draws) - est.mean * est.mean);
    est.se = std::sqrt(var / double(draws));
    return est;
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigensolve(const KernelMatrix& k) {
    Eigen::Map<const Eigen::MatrixXd> km(k.m.data(), k.n, k.n);
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(km);
}

double default_rel_tol(int n) { return n * std::numeric_limits<double>::epsilon(); }

}  // namespace

EigDiagnostics eig_diagnostics(const KernelMatrix& k, double rel_tol) {
    if (k.n == 0) return {};
    auto es = eigensolve(k);
    const auto& ev = es.eigenvalues();
    EigDiagnostics d;
    d.min_eig = ev(0);
    d.max_eig = ev(k.n - 1);
    double scale = std::max(std::abs(d.min_eig), std::abs(d.max_eig));
    if (rel_tol < 0) rel_tol = default_rel_tol(k.n);
    d.cutoff = rel_tol * scale;
    d.rank = 0;
    for (int i = 0; i < k.n; ++i)
        if (ev(i) > d.cutoff) ++d.rank;
    return d;
}

double min_eig(const KernelMatrix& k) { return eig_diagnostics(k).min_eig; }

int rank(const KernelMatrix& k, double rel_tol) { return eig_diagnostics(k, rel_tol).rank; }

RidgelessFit kernel_ridgeless_fit(const KernelMatrix& k, const std::vector<double>& y,
                                  const std::vector<double>* prior_mean) {
    const int n = k.n;
    if (int(y.size()) != n) throw std::invalid_argument("targets length != kernel size");
    if (prior_mean && int(prior_mean->size()) != n)
        throw std::invalid_argument("prior length != kernel size");

    Eigen::Map<const Eigen::MatrixXd> km(k.m.data(), n, n);
    auto es = eigensolve(k);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd& ev = es.eigenvalues();
    double scale = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
    double cutoff = default_rel_tol(n) * scale;

    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        if (ev(i) > cutoff) inv(i) = 1.0 / ev(i);

    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = y[i] - (prior_mean ? (*prior_mean)[i] : 0.0);

    auto pinv_apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return q * (inv.array() * (q.transpose() * v).array()).matrix();
    };

    Eigen::VectorXd lam = pinv_apply(b);
    for (int it = 0; it < 2; ++it) {  // refinement squeezes out roundoff on PD kernels
        Eigen::VectorXd r = b - km * lam;
        lam += pinv_apply(r);
    }

    RidgelessFit fit;
    fit.coeffs.assign(lam.data(), lam.data() + n);
    Eigen::VectorXd pred = km * lam;
    fit.train_pred.resize(n);
    double inf = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        fit.train_pred[i] = pred(i) + (prior_mean ? (*prior_mean)[i] : 0.0);
        double r = fit.train_pred[i] - y[i];
        inf = std::max(inf, std::abs(r));
        sq += r * r;
    }
    fit.residual_inf = inf;
    fit.residual_l2 = std::sqrt(sq / double(n));
    fit.eig.min_eig = ev(0);
    fit.eig.max_eig = ev(n - 1);
    fit.eig.cutoff = cutoff;
    for (int i = 0; i < n; ++i)
        if (ev(i) > cutoff) ++fit.eig.rank;
    return fit;
}

ThresholdReport interpolation_thresholds(int p, long n, int h, long rho_c, double delta,
                                         double s4_over_sigma4) {
    if (p < 2 || n < 1 || h < 1) throw std::invalid_argument("need p >= 2, n >= 1, h >= 1");
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta in (0,1)");
    ThresholdReport r;
    r.h_sufficient = 4.0 * s4_over_sigma4 * double(rho_c) * std::log(double(n) / delta);
    r.h_impossible = double(n) / (3.0 * p);
    r.sufficient = double(h) > r.h_sufficient;
    r.impossible = double(h) < r.h_impossible;
    return r;
}

long rho_c_of(const ModAddDataset& ds) {
    std::vector<long> count(ds.p, 0);
    for (const DataPoint& pt : ds.points) ++count[pt.c];
    long best = 0;
    for (long c : count) best = std::max(best, c);
    return best;
}

double frobenius_diff(const KernelMatrix& a, const KernelMatrix& b) {
    if (a.n != b.n) throw std::invalid_argument("kernel size mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.m.size(); ++i) {
        double d = a.m[i] - b.m[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double entk_drift(const QuadNetParams& theta_t, const QuadNetParams& theta_0,
                  const std::vector<DataPoint>& probe, TaskKind task) {
    return frobenius_diff(entk_for_task(theta_t, probe, task),
                          entk_for_task(theta_0, probe, task));
}

std::vector<DataPoint> sample_probe_points(int p, TaskKind task, int count, std::uint64_t seed) {
    const long long pop =
        task == TaskKind::Regression ? (long long)p * p * p : (long long)p * p;
    auto decode = [&](long long idx) {
        DataPoint pt;
        if (task == TaskKind::Regression) {
            pt.a = int(idx / (p * p));
            pt.b = int((idx / p) % p);
            pt.c = int(idx % p);
            pt.label = ((pt.a + pt.b) % p == pt.c) ? double(p) : 0.0;
        } else {
            pt.a = int(idx / p);
            pt.b = int(idx % p);
            pt.c = (pt.a + pt.b) % p;
            pt.label = pt.c;
        }
        return pt;
    };
    std::vector<long long> picked;
    if (count >= pop) {
        picked.resize(pop);
        for (long long i = 0; i < pop; ++i) picked[i] = i;
    } else {
        RngStream rs = stream(seed, "entk.probe");
        std::unordered_set<long long> seen;
        while ((long long)seen.size() < count) seen.insert((long long)rs.next_below(pop));
        picked.assign(seen.begin(), seen.end());
        std::sort(picked.begin(), picked.end());
    }
    std::vector<DataPoint> pts;
    pts.reserve(picked.size());
    for (long long idx : picked) pts.push_back(decode(idx));
    return pts;
}

void save_kernel_matrix(const KernelMatrix& k, const std::string& base, int p, int h,
                        const std::string& source_checkpoint) {
    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + base + ".bin for writing");
    bin.write(reinterpret_cast<const char*>(k.m.data()),
              std::streamsize(k.m.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("write failed: " + base + ".bin");
    nlohmann::json j = {{"n", k.n},
                        {"p", p},
                        {"h", h},
                        {"source_checkpoint", source_checkpoint},
                        {"schema_version", 1}};
    std::ofstream side(base + ".json");
    side << j.dump(2) << "\n";
}

KernelMatrix load_kernel_matrix(const std::string& base) {
    std::ifstream side(base + ".json");
    if (!side) throw std::runtime_error("cannot open " + base + ".json");
    nlohmann::json j;
    side >> j;
    KernelMatrix k = KernelMatrix::zeros(j.at("n").get<int>());
    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + base + ".bin");
    bin.read(reinterpret_cast<char*>(k.m.data()), std::streamsize(k.m.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("kernel file truncated: " + base + ".bin");
    return k;
}

}  // namespace mg
