#include "modgrok/quadnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "modgrok/kernels.hpp"

namespace mg {

double linf_norm(const QuadNetParams& t) {
    return std::max(kern::max_abs(t.wt.data(), t.wt.size()),
                    kern::max_abs(t.v.data(), t.v.size()));
}

void scale_params(QuadNetParams& t, double factor) {
    for (double& x : t.wt) x *= factor;
    for (double& x : t.v) x *= factor;
}

void zero_params(QuadNetParams& t) {
    std::fill(t.wt.begin(), t.wt.end(), 0.0);
    std::fill(t.v.begin(), t.v.end(), 0.0);
}

double params_sum_sq(const QuadNetParams& t) {
    return kern::sum_sq(t.wt.data(), t.wt.size()) + kern::sum_sq(t.v.data(), t.v.size());
}

void forward_logits(const QuadNetParams& t, int a, int b, double* out) {
    const int h = t.h;
    std::vector<double> u(h), s(h);
    kern::add(t.wt_row(a), t.wt_row(b + t.p), u.data(), h);
    kern::square(u.data(), s.data(), h);
    for (int c = 0; c < t.p; ++c) out[c] = kern::dot(t.v_row(c), s.data(), h);
}

std::vector<double> forward_class(const QuadNetParams& t, int a, int b) {
    std::vector<double> out(t.p);
    forward_logits(t, a, b, out.data());
    return out;
}

double forward_reg(const QuadNetParams& t, int a, int b, int c) {
    const int h = t.h;
    std::vector<double> u(h), s(h);
    kern::add(t.wt_row(a), t.wt_row(b + t.p), u.data(), h);
    kern::square(u.data(), s.data(), h);
    return kern::dot(t.v_row(c), s.data(), h);
}

std::vector<double> forward_class_onehot(const QuadNetParams& t, int a, int b) {
    const int p = t.p, h = t.h;
    std::vector<double> x(2 * p, 0.0);
    x[a] = 1.0;
    x[p + b] = 1.0;
    std::vector<double> w = to_w_rowmajor(t);  // h x 2p
    std::vector<double> wx(h, 0.0);
    for (int k = 0; k < h; ++k)
        for (int j = 0; j < 2 * p; ++j) wx[k] += w[std::size_t(k) * 2 * p + j] * x[j];
    std::vector<double> out(p, 0.0);
    for (int c = 0; c < p; ++c)
        for (int k = 0; k < h; ++k) out[c] += t.v[std::size_t(c) * h + k] * wx[k] * wx[k];
    return out;
}

void accumulate_grad_reg(const QuadNetParams& t, int a, int b, int c, double weight,
                         QuadNetParams& grad) {
    const int h = t.h;
    std::vector<double> u(h), tmp(h);
    kern::add(t.wt_row(a), t.wt_row(b + t.p), u.data(), h);
    // dg/dV[c,k] = u_k^2
    kern::square(u.data(), tmp.data(), h);
    kern::axpy(weight, tmp.data(), grad.v_row(c), h);
    // dg/dW[k,a] = dg/dW[k,b+p] = 2 V[c,k] u_k
    kern::mul(t.v_row(c), u.data(), tmp.data(), h);
    kern::axpy(2.0 * weight, tmp.data(), grad.wt_row(a), h);
    kern::axpy(2.0 * weight, tmp.data(), grad.wt_row(b + t.p), h);
}

QuadNetParams grad_reg(const QuadNetParams& t, const DataPoint& pt, double weight) {
    QuadNetParams g = QuadNetParams::zeros(t.p, t.h);
    accumulate_grad_reg(t, pt.a, pt.b, pt.c, weight, g);
    return g;
}

int argmax_smallest(const double* x, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (x[i] > x[best]) best = i;
    return best;
}

namespace {

void check_task_loss(const ModAddDataset& ds, LossKind loss) {
    bool ok = (loss == LossKind::Square && ds.task == TaskKind::Regression) ||
              (loss == LossKind::CrossEntropy && ds.task == TaskKind::Classification);
    if (!ok) throw std::invalid_argument("loss kind does not match dataset task");
}

// U, S rows for points [lo, hi) of ds; S = ((W e_a) + (W e_b))^2 rows
void fill_us(const QuadNetParams& t, const ModAddDataset& ds, std::size_t lo, std::size_t hi,
             std::vector<double>& U, std::vector<double>& S) {
    const int h = t.h;
    std::size_t B = hi - lo;
    U.resize(B * h);
    S.resize(B * h);
    for (std::size_t i = 0; i < B; ++i) {
        const DataPoint& pt = ds.points[lo + i];
        kern::add(t.wt_row(pt.a), t.wt_row(pt.b + t.p), &U[i * h], h);
        kern::square(&U[i * h], &S[i * h], h);
    }
}

double ce_from_logits(double* l, int p, int y, double* probs_out) {
    double m = l[0];
    for (int c = 1; c < p; ++c) m = std::max(m, l[c]);
    double z = 0.0;
    for (int c = 0; c < p; ++c) z += std::exp(l[c] - m);
    double lse = m + std::log(z);
    if (probs_out)
        for (int c = 0; c < p; ++c) probs_out[c] = std::exp(l[c] - lse);
    return lse - l[y];
}

double class_grad_batch(const QuadNetParams& t, const ModAddDataset& ds, Workspace& ws,
                        QuadNetParams& grad, double* acc_out) {
    const int p = t.p, h = t.h;
    const std::size_t B = ds.size();
    fill_us(t, ds, 0, B, ws.U, ws.S);
    ws.L.resize(B * p);
    kern::gemm_nt(ws.S.data(), h, t.v.data(), h, ws.L.data(), p, B, p, h, false);

    ws.DL.resize(B * p);
    ws.du.resize(h);
    ws.tmp.resize(h);
    double loss = 0.0;
    std::size_t correct = 0;
    const double invB = 1.0 / double(B);
    for (std::size_t i = 0; i < B; ++i) {
        double* l = &ws.L[i * p];
        int y = ds.points[i].c;
        if (argmax_smallest(l, p) == y) ++correct;
        loss += ce_from_logits(l, p, y, &ws.DL[i * p]) * invB;
        ws.DL[i * p + y] -= 1.0;
    }
    for (std::size_t i = 0; i < B; ++i) {
        const DataPoint& pt = ds.points[i];
        const double* dl = &ws.DL[i * p];
        const double* u = &ws.U[i * h];
        const double* s = &ws.S[i * h];
        // dV[c,:] += dl_c * s ; du = sum_c dl_c V[c,:]
        std::fill(ws.du.begin(), ws.du.end(), 0.0);
        for (int c = 0; c < p; ++c) {
            double w = dl[c] * invB;
            kern::axpy(w, s, grad.v_row(c), h);
            kern::axpy(w, t.v_row(c), ws.du.data(), h);
        }
        // dW[:,a] and dW[:,b+p] += 2 u . du
        kern::mul(u, ws.du.data(), ws.tmp.data(), h);
        kern::axpy(2.0, ws.tmp.data(), grad.wt_row(pt.a), h);
        kern::axpy(2.0, ws.tmp.data(), grad.wt_row(pt.b + p), h);
    }
    if (acc_out) *acc_out = double(correct) / double(B);
    return loss;
}

// Routes the batch through the shared (a,b) pair table: one gemm for all
// logits, then per-point axpy into dV and a per-pair rank-one pass for dW.
// Fills ws.U/S/L so the caller can evaluate other datasets against the same
// forward values.
double square_grad_batch(const QuadNetParams& t, const ModAddDataset& ds, Workspace& ws,
                         QuadNetParams& grad, double* acc_out) {
    const int p = t.p, h = t.h;
    const std::size_t n = ds.size();
    const std::size_t P2 = std::size_t(p) * p;
    build_pair_logit_table(t, ws);
    ws.D.assign(P2 * h, 0.0);  // per-pair sum of 2*w_i*V_row(c_i)
    ws.tmp.resize(h);
    std::vector<int> amax;
    if (acc_out) {
        amax.resize(P2);
        for (std::size_t q = 0; q < P2; ++q) amax[q] = argmax_smallest(&ws.L[q * p], p);
    }
    double loss = 0.0;
    std::size_t correct = 0;
    const double invN = 1.0 / double(n);
    for (const DataPoint& pt : ds.points) {
        const std::size_t q = std::size_t(pt.a) * p + pt.b;
        const double r = ws.L[q * p + pt.c] - pt.label;
        loss += r * r * invN;
        const double w = 2.0 * r * invN;
        kern::axpy(w, &ws.S[q * h], grad.v_row(pt.c), h);
        kern::axpy(2.0 * w, t.v_row(pt.c), &ws.D[q * h], h);
        if (acc_out && amax[q] == (pt.a + pt.b) % p) ++correct;
    }
    for (std::size_t q = 0; q < P2; ++q) {
        // rows a and b+p of W both receive D_q ⊙ u_q
        kern::mul(&ws.D[q * h], &ws.U[q * h], ws.tmp.data(), h);
        const int a = int(q) / p, b = int(q) % p;
        kern::add(grad.wt_row(a), ws.tmp.data(), grad.wt_row(a), h);
        kern::add(grad.wt_row(b + p), ws.tmp.data(), grad.wt_row(b + p), h);
    }
    if (acc_out) *acc_out = double(correct) / double(n);
    return loss;
}

EvalMetrics class_eval(const QuadNetParams& t, const ModAddDataset& ds, Workspace& ws) {
    const int p = t.p, h = t.h;
    const std::size_t B = ds.size();
    const std::size_t block = 2048;
    EvalMetrics m;
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t lo = 0; lo < B; lo += block) {
        std::size_t hi = std::min(lo + block, B);
        fill_us(t, ds, lo, hi, ws.U, ws.S);
        ws.L.resize((hi - lo) * p);
        kern::gemm_nt(ws.S.data(), h, t.v.data(), h, ws.L.data(), p, hi - lo, p, h, false);
        for (std::size_t i = 0; i < hi - lo; ++i) {
            double* l = &ws.L[i * p];
            int y = ds.points[lo + i].c;
            if (argmax_smallest(l, p) == y) ++correct;
            loss += ce_from_logits(l, p, y, nullptr);
        }
    }
    m.loss = loss / double(B);
    m.acc = double(correct) / double(B);
    return m;
}

}  // namespace

// logits for every (a,b) pair, p^2 x p; reuses U/S buffers
void build_pair_logit_table(const QuadNetParams& t, Workspace& ws) {
    const int p = t.p, h = t.h;
    const std::size_t P2 = std::size_t(p) * p;
    ws.U.resize(P2 * h);
    ws.S.resize(P2 * h);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            std::size_t i = std::size_t(a) * p + b;
            kern::add(t.wt_row(a), t.wt_row(b + p), &ws.U[i * h], h);
            kern::square(&ws.U[i * h], &ws.S[i * h], h);
        }
    ws.L.resize(P2 * p);
    kern::gemm_nt(ws.S.data(), h, t.v.data(), h, ws.L.data(), p, P2, p, h, false);
}

EvalMetrics regression_eval_from_table(int p, const std::vector<double>& table,
                                       const ModAddDataset& ds) {
    EvalMetrics m;
    // argmax is shared by every point of a pair; cache it per pair
    std::vector<int> amax(std::size_t(p) * p);
    for (std::size_t q = 0; q < amax.size(); ++q)
        amax[q] = argmax_smallest(&table[q * p], p);
    double loss = 0.0;
    std::size_t correct = 0;
    for (const DataPoint& pt : ds.points) {
        const std::size_t q = std::size_t(pt.a) * p + pt.b;
        double r = table[q * p + pt.c] - pt.label;
        loss += r * r;
        if (amax[q] == (pt.a + pt.b) % p) ++correct;
    }
    m.loss = loss / double(ds.size());
    m.acc = double(correct) / double(ds.size());
    return m;
}

double grad_batch_ws(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss, Workspace& ws,
                     QuadNetParams& grad, double* acc_out) {
    check_task_loss(ds, loss);
    if (ds.size() == 0) throw std::invalid_argument("empty dataset");
    if (loss == LossKind::CrossEntropy) return class_grad_batch(t, ds, ws, grad, acc_out);
    return square_grad_batch(t, ds, ws, grad, acc_out);
}

std::pair<double, QuadNetParams> grad_batch(const QuadNetParams& t, const ModAddDataset& ds,
                                            LossKind loss) {
    Workspace ws;
    QuadNetParams grad = QuadNetParams::zeros(t.p, t.h);
    double l = grad_batch_ws(t, ds, loss, ws, grad);
    return {l, std::move(grad)};
}

EvalMetrics eval_metrics_ws(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss,
                            Workspace& ws) {
    check_task_loss(ds, loss);
    if (ds.size() == 0) throw std::invalid_argument("empty dataset");
    if (loss == LossKind::CrossEntropy) return class_eval(t, ds, ws);
    build_pair_logit_table(t, ws);
    return regression_eval_from_table(t.p, ws.L, ds);
}

EvalMetrics eval_metrics(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss) {
    Workspace ws;
    return eval_metrics_ws(t, ds, loss, ws);
}

MarginReport margin(const QuadNetParams& t, const ModAddDataset& ds) {
    if (ds.task != TaskKind::Classification)
        throw std::invalid_argument("margins are defined for classification datasets");
    if (ds.size() == 0) throw std::invalid_argument("empty dataset");
    MarginReport rep;
    rep.per_point.reserve(ds.size());
    std::vector<double> l(t.p);
    for (const DataPoint& pt : ds.points) {
        forward_logits(t, pt.a, pt.b, l.data());
        int y = pt.c;
        double best_other = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < t.p; ++c)
            if (c != y) best_other = std::max(best_other, l[c]);
        rep.per_point.push_back(l[y] - best_other);
    }
    rep.q_min = *std::min_element(rep.per_point.begin(), rep.per_point.end());
    return rep;
}

std::vector<double> to_w_rowmajor(const QuadNetParams& t) {
    const int p2 = 2 * t.p, h = t.h;
    std::vector<double> w(std::size_t(h) * p2);
    for (int j = 0; j < p2; ++j)
        for (int k = 0; k < h; ++k) w[std::size_t(k) * p2 + j] = t.wt[std::size_t(j) * h + k];
    return w;
}

void from_w_rowmajor(QuadNetParams& t, const std::vector<double>& w) {
    const int p2 = 2 * t.p, h = t.h;
    if (w.size() != std::size_t(h) * p2) throw std::invalid_argument("bad W buffer size");
    for (int j = 0; j < p2; ++j)
        for (int k = 0; k < h; ++k) t.wt[std::size_t(j) * h + k] = w[std::size_t(k) * p2 + j];
}

void save_checkpoint(const QuadNetParams& t, TaskKind task, const std::string& base) {
    std::vector<double> w = to_w_rowmajor(t);
    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + base + ".bin for writing");
    bin.write(reinterpret_cast<const char*>(w.data()), std::streamsize(w.size() * sizeof(double)));
    bin.write(reinterpret_cast<const char*>(t.v.data()), std::streamsize(t.v.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("write failed: " + base + ".bin");

    nlohmann::json j = {{"p", t.p}, {"h", t.h}, {"task", task_name(task)}, {"schema_version", 1}};
    std::ofstream side(base + ".json");
    side << j.dump(2) << "\n";
}

std::pair<QuadNetParams, TaskKind> load_checkpoint(const std::string& base) {
    std::ifstream side(base + ".json");
    if (!side) throw std::runtime_error("cannot open " + base + ".json");
    nlohmann::json j;
    side >> j;
    int p = j.at("p").get<int>();
    int h = j.at("h").get<int>();
    TaskKind task = task_from_name(j.at("task").get<std::string>());

    QuadNetParams t = QuadNetParams::zeros(p, h);
    std::vector<double> w(std::size_t(h) * 2 * p);
    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + base + ".bin");
    bin.read(reinterpret_cast<char*>(w.data()), std::streamsize(w.size() * sizeof(double)));
    bin.read(reinterpret_cast<char*>(t.v.data()), std::streamsize(t.v.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("checkpoint truncated: " + base + ".bin");
    from_w_rowmajor(t, w);
    return {std::move(t), task};
}

}  // namespace mg
