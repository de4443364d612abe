#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modgrok/dataset.hpp"
#include "modgrok/quadnet.hpp"

namespace mg {

struct KernelMatrix {
    int n = 0;
    std::vector<double> m;  // row-major, symmetric

    static KernelMatrix zeros(int n) {
        KernelMatrix k;
        k.n = n;
        k.m.assign(std::size_t(n) * n, 0.0);
        return k;
    }
    double& at(int i, int j) { return m[std::size_t(i) * n + j]; }
    double at(int i, int j) const { return m[std::size_t(i) * n + j]; }
};

// Gram matrix of per-point gradients of g(theta; (a,b,c)). Entries use the
// sparsity of one-hot inputs: only V row c and W columns a, b+p are active,
// so each entry is O(h).
KernelMatrix entk_regression(const QuadNetParams& theta, const std::vector<DataPoint>& pts);

// Gram matrix of gradients of the first logit f_0(theta; (a,b)).
KernelMatrix entk_class_first_logit(const QuadNetParams& theta, const std::vector<DataPoint>& pts);

KernelMatrix entk_for_task(const QuadNetParams& theta, const std::vector<DataPoint>& pts,
                           TaskKind task);

// Init-distribution moments entering the expected V-part kernel.
struct NtkMoments {
    double sigma_w_sq = 0.0;  // per-entry variance of W at init
    double kappa_w = 3.0;     // kurtosis E w^4 / sigma^4
    int h = 1;
};

// W entries ~ Uniform([-s_w, s_w]): variance s_w^2/3, kurtosis 9/5.
NtkMoments uniform_init_moments(double s_w, int h);

// Per-neuron expectation of the V-gradient kernel contribution
// E[(w_a+w_{b'})^2 (w_{a'}+w_{b''})^2] * 1(c==c'); the full expected
// V-part matrix is h times this. The W-part depends on V's law and has no
// closed form here.
double expected_L_entry(const DataPoint& x, const DataPoint& xp, const NtkMoments& mom);

KernelMatrix expected_L_matrix(const std::vector<DataPoint>& pts, const NtkMoments& mom);

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    long draws = 0;
};

// Monte-Carlo estimate of the per-neuron V-part kernel over fresh uniform
// W draws; oracle for expected_L_entry.
McEstimate mc_expected_L(const DataPoint& x, const DataPoint& xp, double s_w, long draws,
                         std::uint64_t seed);

struct EigDiagnostics {
    double min_eig = 0.0;
    double max_eig = 0.0;
    int rank = 0;
    double cutoff = 0.0;
};

// rel_tol < 0 selects the default n * machine-eps cutoff (relative to the
// largest |eigenvalue|).
EigDiagnostics eig_diagnostics(const KernelMatrix& k, double rel_tol = -1.0);
double min_eig(const KernelMatrix& k);
int rank(const KernelMatrix& k, double rel_tol = -1.0);

struct RidgelessFit {
    std::vector<double> coeffs;      // lambda = K^+ (y - prior)
    std::vector<double> train_pred;  // K lambda + prior
    double residual_inf = 0.0;       // max_i |pred_i - y_i|
    double residual_l2 = 0.0;        // sqrt(mean squared residual)
    EigDiagnostics eig;
};

RidgelessFit kernel_ridgeless_fit(const KernelMatrix& k, const std::vector<double>& y,
                                  const std::vector<double>* prior_mean = nullptr);

struct ThresholdReport {
    bool sufficient = false;   // h above the moment-ratio width threshold
    bool impossible = false;   // h below the rank obstruction n/(3p)
    double h_sufficient = 0.0;
    double h_impossible = 0.0;
};

// s4_over_sigma4 = s_W^4 / sigma_W^4 (9 for uniform init), so the
// sufficient width reads 4 * s4_over_sigma4 * rho_c * ln(n/delta).
ThresholdReport interpolation_thresholds(int p, long n, int h, long rho_c, double delta,
                                         double s4_over_sigma4 = 9.0);

// Largest multiplicity of any c among the points.
long rho_c_of(const ModAddDataset& ds);

double frobenius_diff(const KernelMatrix& a, const KernelMatrix& b);

// || K(theta_t) - K(theta_0) ||_F on a fixed probe set.
double entk_drift(const QuadNetParams& theta_t, const QuadNetParams& theta_0,
                  const std::vector<DataPoint>& probe, TaskKind task);

// Fixed random probe subset of the full population (indices sampled without
// replacement, emitted in index order).
std::vector<DataPoint> sample_probe_points(int p, TaskKind task, int count, std::uint64_t seed);

// <base>.bin: row-major doubles; <base>.json: {n, p, h, source_checkpoint}.
void save_kernel_matrix(const KernelMatrix& k, const std::string& base, int p, int h,
                        const std::string& source_checkpoint);
KernelMatrix load_kernel_matrix(const std::string& base);

}  // namespace mg
