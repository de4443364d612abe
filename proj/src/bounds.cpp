#include "modgrok/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "modgrok/permutation.hpp"
#include "modgrok/rng.hpp"

namespace mg {

double c_d(int p, int d) {
    if (p < 2 || d < 0) throw std::invalid_argument("need p >= 2, d >= 0");
    if (d == 0) return 1.0 / p;
    return (1.0 - 1.0 / std::pow(1.0 - p, d - 1)) / (double(p) * p);
}

long grid_size(int p, int m) {
    long s = 1;
    for (int i = 0; i < m; ++i) s *= p;
    return s;
}

int grid_coord(long idx, int p, int m, int i) {
    for (int j = m - 1; j > i; --j) idx /= p;
    return int(idx % p);
}

int differing_coords(long x, long xp, int p, int m) {
    int d = 0;
    for (int i = 0; i < m; ++i) {
        if (x % p != xp % p) ++d;
        x /= p;
        xp /= p;
    }
    return d;
}

SliceSpace SliceSpace::make(int p, int m) {
    SliceSpace s;
    s.p = p;
    s.m = m;
    s.pm = grid_size(p, m);
    s.basis.assign(std::size_t(m) * p * s.pm, 0.0);
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < p; ++a) {
            double* row = &s.basis[(std::size_t(i) * p + a) * s.pm];
            for (long x = 0; x < s.pm; ++x)
                if (grid_coord(x, p, m, i) == a) row[x] = 1.0;
        }
    return s;
}

namespace {

double factorial(int p) {
    double f = 1;
    for (int i = 2; i <= p; ++i) f *= i;
    return f;
}

// ones of Psi_sigma: grid points whose permuted coordinate sum is 0 mod p
std::vector<long> psi_support(const std::vector<std::vector<int>>& sigmas, int p, int m,
                              long pm) {
    std::vector<long> ones;
    ones.reserve(pm / p + 1);
    for (long x = 0; x < pm; ++x) {
        long rest = x;
        int sum = 0;
        for (int i = m - 1; i >= 0; --i) {
            sum += sigmas[i][rest % p];
            rest /= p;
        }
        if (sum % p == 0) ones.push_back(x);
    }
    return ones;
}

void accumulate_outer(std::vector<double>& sigma, const std::vector<long>& ones, long pm) {
    for (long a : ones)
        for (long b : ones) sigma[std::size_t(a) * pm + b] += 1.0;
}

}  // namespace

CovarianceResult brute_covariance(int p, int m) {
    const double total = std::pow(factorial(p), m);
    if (total > 1e6)
        throw std::invalid_argument("brute-force covariance infeasible: (p!)^m > 1e6");
    CovarianceResult r;
    r.p = p;
    r.m = m;
    r.pm = grid_size(p, m);
    r.sigma.assign(std::size_t(r.pm) * r.pm, 0.0);
    r.exact = true;

    std::vector<std::vector<int>> perms;
    std::vector<int> ident(p);
    std::iota(ident.begin(), ident.end(), 0);
    std::vector<int> cur = ident;
    do {
        perms.push_back(cur);
    } while (std::next_permutation(cur.begin(), cur.end()));

    std::vector<std::vector<int>> tuple(m, ident);
    std::vector<std::size_t> odo(m, 0);
    long count = 0;
    for (;;) {
        for (int i = 0; i < m; ++i) tuple[i] = perms[odo[i]];
        accumulate_outer(r.sigma, psi_support(tuple, p, m, r.pm), r.pm);
        ++count;
        int i = m - 1;
        while (i >= 0 && ++odo[i] == perms.size()) odo[i--] = 0;
        if (i < 0) break;
    }
    r.tuples = count;
    for (double& v : r.sigma) v /= double(count);
    return r;
}

CovarianceResult mc_covariance(int p, int m, long trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials >= 1");
    CovarianceResult r;
    r.p = p;
    r.m = m;
    r.pm = grid_size(p, m);
    r.sigma.assign(std::size_t(r.pm) * r.pm, 0.0);
    r.exact = false;
    r.tuples = trials;

    RngStream rs = stream(seed, "cov.mc");
    std::vector<std::vector<int>> tuple(m);
    for (long t = 0; t < trials; ++t) {
        for (int i = 0; i < m; ++i) tuple[i] = random_permutation(rs, p);
        accumulate_outer(r.sigma, psi_support(tuple, p, m, r.pm), r.pm);
    }
    double se_max = 0.0;
    for (double& v : r.sigma) {
        v /= double(trials);
        se_max = std::max(se_max, std::sqrt(std::max(0.0, v * (1.0 - v)) / double(trials)));
    }
    r.mc_se = se_max;
    return r;
}

CovarianceResult target_covariance(int p, int m, long trials, std::uint64_t seed) {
    if (std::pow(factorial(p), m) <= 1e6) return brute_covariance(p, m);
    return mc_covariance(p, m, trials, seed);
}

GdCheck g_d_identity_check(int p, int m, int d, std::uint64_t seed) {
    if (d < 0 || d > m) throw std::invalid_argument("need 0 <= d <= m");
    const long pm = grid_size(p, m);

    RngStream rs = stream(seed, "gd.vector");
    Eigen::VectorXd v(pm);
    for (long x = 0; x < pm; ++x) v(x) = rs.next_uniform(-1.0, 1.0);

    // Project every tensor factor onto its zero-sum subspace. What survives is
    // the pure m-way interaction component, orthogonal to anything that
    // depends on fewer than m coordinates (the slice span alone is only
    // enough when m = 2).
    long stride = pm;
    for (int i = 0; i < m; ++i) {
        stride /= p;
        for (long base = 0; base < pm; ++base) {
            if (grid_coord(base, p, m, i) != 0) continue;
            double mean = 0;
            for (int a = 0; a < p; ++a) mean += v(base + a * stride);
            mean /= p;
            for (int a = 0; a < p; ++a) v(base + a * stride) -= mean;
        }
    }
    double norm = v.norm();
    if (norm < 1e-10) throw std::runtime_error("projected vector degenerate; try another seed");
    v /= norm;

    GdCheck chk;
    for (long x = 0; x < pm; ++x)
        for (long xp = 0; xp < pm; ++xp)
            if (differing_coords(x, xp, p, m) == d) chk.lhs += v(x) * v(xp);
    double binom = 1.0;
    for (int i = 0; i < d; ++i) binom = binom * (m - i) / (i + 1);
    chk.rhs = ((d % 2) ? -1.0 : 1.0) * binom;
    return chk;
}

double top_eig_sum_bound(int p, int m, long n) {
    return std::pow(double(p), m - 2) + double(n) / p * std::exp(double(m - 1) / (p - 1));
}

double kernel_lower_bound_rhs(int p, int m, double n) {
    double pm = std::pow(double(p), m);
    return std::pow(double(p), m - 1) *
           (1.0 - 1.0 / p - n / pm * std::exp(double(m - 1) / (p - 1)));
}

double kernel_lower_bound_rhs_classification(int p, double n) {
    return double(p) * p * (1.0 - 1.0 / p - n / (double(p) * p) * std::exp(2.0 / (p - 1)));
}

double lower_bound_zero_crossing(int p, int m) {
    return std::pow(double(p), m) * (1.0 - 1.0 / p) * std::exp(-double(m - 1) / (p - 1));
}

double rademacher_bound(double r, double rp, int h, int p, long n) {
    double rm = std::max(r, rp);
    return 324.0 * h * std::sqrt(double(p)) * rm * rm * rm / std::sqrt(double(n));
}

double srebro_smooth_bound(double emp_loss, double rad, double smooth_h, double b, long n,
                           double delta, double k_const) {
    double ln = std::log(double(n));
    double tail = b * std::log(1.0 / delta) / double(n);
    return emp_loss +
           k_const * (std::sqrt(emp_loss) *
                          (std::sqrt(smooth_h) * std::pow(ln, 1.5) * rad + std::sqrt(tail)) +
                      smooth_h * ln * ln * ln * rad * rad + tail);
}

double regression_gen_bound(double R, int h, int p, long n, double delta, double c_const) {
    double ln = std::log(double(n));
    double r6 = std::pow(R, 6);
    return c_const * r6 * double(h) * h / double(n) * (p * ln * ln * ln + std::log(1.0 / delta));
}

ClassGenBound classification_gen_bound(double gamma, double r, int h, int p, long n,
                                       double delta, double delta1) {
    if (n < 2) throw std::invalid_argument("need n >= 2");
    if (delta1 < 0) delta1 = delta;
    ClassGenBound b;
    double nm = gamma / (r * r * r);  // normalized margin
    b.t = nm / (256.0 * std::sqrt(2.0 * h));
    double log_h = std::log(2.0 * (h + 1) / delta1);
    b.regime_star = nm / (256.0 * std::sqrt(2.0 * h) * std::pow(log_h, 1.5)) > 1.0;
    double main = 3.0 * h * p * log_h / std::pow(b.t, 2.0 / 3.0);
    b.value = 4.0 * std::sqrt((main + std::log(6.0 * n / delta)) / double(n - 1));
    b.simplified = std::sqrt(double(p) / n) * std::cbrt(double(h) * h / nm);
    return b;
}

double misclass_from_l2(double l2, int p) {
    if (l2 < 0) throw std::invalid_argument("l2 loss must be nonnegative");
    return std::min(1.0, 2.0 * l2 / p);
}

}  // namespace mg
