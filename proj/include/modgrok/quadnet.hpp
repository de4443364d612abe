#pragma once
// Two-layer quadratic network over one-hot residue pairs:
//   f(theta; a,b) = V (W (e_a, e_b))^{.2},   f_c = sum_k V[c,k] (W[k,a] + W[k,b+p])^2
// g(theta; a,b,c) = f_c. The model is 3-homogeneous: f(s*theta) = s^3 f(theta).
//
// W is stored transposed (wt: 2p x h row-major) so the two columns a point
// touches are contiguous; V is p x h row-major so each logit row is a
// contiguous dot product. Checkpoints keep the conventional h x 2p layout.

#include <cstdint>
#include <string>
#include <vector>

#include "modgrok/dataset.hpp"

namespace mg {

struct QuadNetParams {
    int p = 0;
    int h = 0;
    std::vector<double> wt;  // 2p x h, row j = j'th input's first-layer weights
    std::vector<double> v;   // p x h

    static QuadNetParams zeros(int p, int h) {
        QuadNetParams t;
        t.p = p;
        t.h = h;
        t.wt.assign(std::size_t(2 * p) * h, 0.0);
        t.v.assign(std::size_t(p) * h, 0.0);
        return t;
    }

    double* wt_row(int j) { return wt.data() + std::size_t(j) * h; }
    const double* wt_row(int j) const { return wt.data() + std::size_t(j) * h; }
    double* v_row(int c) { return v.data() + std::size_t(c) * h; }
    const double* v_row(int c) const { return v.data() + std::size_t(c) * h; }
    std::size_t num_params() const { return wt.size() + v.size(); }
};

enum class LossKind { Square, CrossEntropy };

// max |entry| over W and V jointly
double linf_norm(const QuadNetParams& t);
void scale_params(QuadNetParams& t, double factor);
void zero_params(QuadNetParams& t);
// sum of squared entries (for gradient norms)
double params_sum_sq(const QuadNetParams& t);

// logits for one input pair; out has length p
void forward_logits(const QuadNetParams& t, int a, int b, double* out);
std::vector<double> forward_class(const QuadNetParams& t, int a, int b);
double forward_reg(const QuadNetParams& t, int a, int b, int c);

// same forward through explicit one-hot matrix products; test oracle
std::vector<double> forward_class_onehot(const QuadNetParams& t, int a, int b);

// accumulate weight * grad_theta g(theta; a,b,c) into `grad`; only V row c and
// wt rows a, b+p are touched
void accumulate_grad_reg(const QuadNetParams& t, int a, int b, int c, double weight,
                         QuadNetParams& grad);
QuadNetParams grad_reg(const QuadNetParams& t, const DataPoint& pt, double weight);

// scratch buffers reused across training steps
struct Workspace {
    std::vector<double> U, S, L, DL, D, du, tmp;
};

// mean loss over the dataset and its exact gradient (accumulated into `grad`,
// which the caller zeroes). Optionally reports argmax-classifier accuracy
// measured on the same forward pass. Square <-> Regression, CrossEntropy <->
// Classification; mismatches throw.
double grad_batch_ws(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss, Workspace& ws,
                     QuadNetParams& grad, double* acc_out = nullptr);
std::pair<double, QuadNetParams> grad_batch(const QuadNetParams& t, const ModAddDataset& ds,
                                            LossKind loss);

struct EvalMetrics {
    double loss = 0.0;
    double acc = 0.0;
};
// forward-only loss + argmax accuracy. Regression accuracy compares
// argmax_c f_c(a,b) against (a+b) mod p; classification against the stored
// label. Ties in argmax break toward the smallest class index.
// Logits for every (a,b) pair into ws.L (p^2 x p, pair index a*p+b). Lets a
// caller score several regression datasets off one forward sweep.
void build_pair_logit_table(const QuadNetParams& t, Workspace& ws);
EvalMetrics regression_eval_from_table(int p, const std::vector<double>& table,
                                       const ModAddDataset& ds);

EvalMetrics eval_metrics_ws(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss,
                            Workspace& ws);
EvalMetrics eval_metrics(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss);

struct MarginReport {
    double q_min = 0.0;
    std::vector<double> per_point;  // f_y - max_{y' != y} f_{y'}
};
MarginReport margin(const QuadNetParams& t, const ModAddDataset& ds);

// checkpoint = <base>.bin (raw little-endian doubles: W h x 2p row-major, then
// V p x h row-major) + <base>.json sidecar {p, h, task}
void save_checkpoint(const QuadNetParams& t, TaskKind task, const std::string& base);
std::pair<QuadNetParams, TaskKind> load_checkpoint(const std::string& base);

std::vector<double> to_w_rowmajor(const QuadNetParams& t);  // h x 2p
void from_w_rowmajor(QuadNetParams& t, const std::vector<double>& w);

int argmax_smallest(const double* x, int n);

}  // namespace mg
