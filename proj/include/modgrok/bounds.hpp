#pragma once

#include <cstdint>
#include <vector>

namespace mg {

// Expected product E[Psi(x) Psi(x')] of permuted-sum indicators at index
// tuples differing in exactly d coordinates: 1/p at d=0, else
// (1/p^2) (1 - 1/(1-p)^{d-1}).
double c_d(int p, int d);

// Indicator basis s_{i,a}(x) = 1(x[i] == a) over the grid [p]^m; its span is
// the symmetric part of the target covariance.
struct SliceSpace {
    int p = 0, m = 0;
    long pm = 0;                // p^m grid size
    std::vector<double> basis;  // (m*p) rows of length pm

    static SliceSpace make(int p, int m);
    const double* row(int i, int a) const { return &basis[(std::size_t(i) * p + a) * pm]; }
};

// grid index helpers (coordinate 0 has the largest stride)
long grid_size(int p, int m);
int grid_coord(long idx, int p, int m, int i);
int differing_coords(long x, long xp, int p, int m);

struct CovarianceResult {
    int p = 0, m = 0;
    long pm = 0;
    std::vector<double> sigma;  // pm x pm row-major
    bool exact = true;
    long tuples = 0;   // sigma-tuples enumerated or sampled
    double mc_se = 0;  // max per-entry standard error (Monte Carlo only)
};

// Covariance E[Psi_sigma(x) Psi_sigma(x')] over all (p!)^m permutation
// tuples; feasible only while (p!)^m <= 1e6.
CovarianceResult brute_covariance(int p, int m);
CovarianceResult mc_covariance(int p, int m, long trials, std::uint64_t seed);
// brute force when feasible, otherwise Monte Carlo with `trials` samples
CovarianceResult target_covariance(int p, int m, long trials, std::uint64_t seed);

struct GdCheck {
    double lhs = 0;  // sum over ordered pairs differing in d coords of v(x)v(x')
    double rhs = 0;  // (-1)^d binom(m, d)
};

// Draws a random vector, projects it onto the pure m-way interaction
// subspace (orthogonal to anything depending on fewer than m coordinates),
// and evaluates both sides of the distance-d interaction identity.
GdCheck g_d_identity_check(int p, int m, int d, std::uint64_t seed);

// Upper bound on the sum of the covariance's top n eigenvalues:
// p^{m-2} + (n/p) exp((m-1)/(p-1)).
double top_eig_sum_bound(int p, int m, long n);

// Lower bound on the ensemble-expected total squared residual of any
// n-section kernel predictor: p^{m-1} (1 - 1/p - (n/p^m) exp((m-1)/(p-1))).
double kernel_lower_bound_rhs(int p, int m, double n);
// classification variant: n labeled pairs behave like n*p regression triples
double kernel_lower_bound_rhs_classification(int p, double n);
// sample count where the regression RHS crosses zero
double lower_bound_zero_crossing(int p, int m);

// Rademacher complexity of width-h cubic nets with ||W||_inf <= r,
// ||V||_inf <= r': 324 h sqrt(p) max(r,r')^3 / sqrt(n).
double rademacher_bound(double r, double rp, int h, int p, long n);

// Optimistic rate for an H-smooth loss bounded by b (constant K exposed,
// default 1): emp + K (sqrt(emp) (sqrt(H) log^{1.5}n rad + sqrt(b log(1/d)/n))
//                      + H log^3 n rad^2 + b log(1/d)/n).
double srebro_smooth_bound(double emp_loss, double rad, double smooth_h, double b, long n,
                           double delta, double k_const = 1.0);

// Interpolating-regression population bound, up to the unspecified constant
// C: C R^6 h^2 / n (p log^3 n + log(1/delta)).
double regression_gen_bound(double R, int h, int p, long n, double delta, double c_const = 1.0);

struct ClassGenBound {
    double value = 0;       // 4 sqrt((3hp log(2(h+1)/d1)/t^{2/3} + log(6n/d)) / (n-1))
    double t = 0;           // (gamma/r^3) / (256 sqrt(2h))
    bool regime_star = false;  // perturbation regime selector
    double simplified = 0;  // sqrt(p/n) cbrt(h^2/(gamma/r^3)), log factors dropped
};

// delta1 < 0 means delta1 = delta.
ClassGenBound classification_gen_bound(double gamma, double r, int h, int p, long n,
                                       double delta, double delta1 = -1.0);

// min(1, 2 L2 / p) for mean population square loss L2
double misclass_from_l2(double l2, int p);

}  // namespace mg
