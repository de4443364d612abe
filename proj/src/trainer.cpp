#include "modgrok/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "modgrok/kernels.hpp"
#include "modgrok/ntk.hpp"
#include "modgrok/rng.hpp"

namespace mg {

QuadNetParams init_params(int p, int h, const TrainConfig& cfg) {
    QuadNetParams t = QuadNetParams::zeros(p, h);
    const double alpha = cfg.init_scale;
    {
        RngStream rs = stream(cfg.seed, "init.W");
        const double bound = std::sqrt(1.0 / double(2 * p));
        for (int k = 0; k < h; ++k)  // W row-major draw order, stored transposed
            for (int j = 0; j < 2 * p; ++j)
                t.wt[std::size_t(j) * h + k] = alpha * rs.next_uniform(-bound, bound);
    }
    {
        RngStream rs = stream(cfg.seed, "init.V");
        const double bound = std::sqrt(1.0 / double(h));
        for (int c = 0; c < p; ++c)
            for (int k = 0; k < h; ++k)
                t.v[std::size_t(c) * h + k] = alpha * rs.next_uniform(-bound, bound);
    }
    return t;
}

QuadNetParams linf_reg_subgradient(const QuadNetParams& theta, double lambda_inf) {
    QuadNetParams g = QuadNetParams::zeros(theta.p, theta.h);
    if (lambda_inf == 0.0) return g;
    const double m = linf_norm(theta);
    if (m == 0.0) return g;
    const double thresh = m * (1.0 - 1e-12);

    std::size_t ties = 0;
    auto count = [&](const std::vector<double>& buf) {
        for (double x : buf)
            if (std::abs(x) >= thresh) ++ties;
    };
    count(theta.wt);
    count(theta.v);

    const double share = lambda_inf / double(ties);
    auto fill = [&](const std::vector<double>& src, std::vector<double>& dst) {
        for (std::size_t i = 0; i < src.size(); ++i)
            if (std::abs(src[i]) >= thresh) dst[i] = src[i] > 0.0 ? share : -share;
    };
    fill(theta.wt, g.wt);
    fill(theta.v, g.v);
    return g;
}

namespace {

void axpy_params(double alpha, const QuadNetParams& x, QuadNetParams& y) {
    kern::axpy(alpha, x.wt.data(), y.wt.data(), x.wt.size());
    kern::axpy(alpha, x.v.data(), y.v.data(), x.v.size());
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const ModAddDataset& train_ds,
                  const ModAddDataset& test_ds, const QuadNetParams* theta0,
                  const StepObserver& observer) {
    if (cfg.steps < 1) throw std::invalid_argument("steps >= 1 required");
    if (cfg.lr <= 0.0) throw std::invalid_argument("lr > 0 required");

    TrainResult res;
    res.theta = theta0 ? *theta0 : init_params(cfg.p, cfg.h, cfg);
    QuadNetParams& theta = res.theta;
    if (theta.p != cfg.p || theta.h != cfg.h)
        throw std::invalid_argument("theta0 shape does not match config");

    QuadNetParams grad = QuadNetParams::zeros(cfg.p, cfg.h);
    Workspace ws;
    const bool regression = (cfg.loss == LossKind::Square);

    // kernel drift probes on a fixed random subset of the population
    const bool probing = cfg.entk_probe_every > 0;
    std::vector<DataPoint> probe;
    KernelMatrix k0, k_t1;
    if (probing) {
        long long pop = regression ? (long long)cfg.p * cfg.p * cfg.p
                                   : (long long)cfg.p * cfg.p;
        int want = cfg.entk_probe_points > 0 ? cfg.entk_probe_points
                                             : int(std::min<long long>(pop, 2000));
        probe = sample_probe_points(cfg.p, train_ds.task, want, cfg.seed);
        k0 = entk_for_task(theta, probe, train_ds.task);
    }

    if (observer) observer(0, theta);
    res.metrics.reserve(std::size_t(cfg.steps) + 1);

    for (long t = 0; t <= cfg.steps; ++t) {
        zero_params(grad);
        MetricsRow row;
        row.step = t;

        if (regression) {
            // gradient pass fills ws.L; both accuracies read the same table
            row.train_loss = grad_batch_ws(theta, train_ds, cfg.loss, ws, grad, &row.train_acc);
            EvalMetrics te = regression_eval_from_table(cfg.p, ws.L, test_ds);
            row.test_loss = te.loss;
            row.test_acc = te.acc;
        } else {
            row.train_loss = grad_batch_ws(theta, train_ds, cfg.loss, ws, grad, &row.train_acc);
            EvalMetrics te = eval_metrics_ws(theta, test_ds, cfg.loss, ws);
            row.test_loss = te.loss;
            row.test_acc = te.acc;
        }
        row.linf_norm = linf_norm(theta);
        row.grad_l2 = std::sqrt(params_sum_sq(grad));

        KernelMatrix kt;
        bool have_kt = false;
        if (probing && (t % cfg.entk_probe_every == 0 || t == cfg.steps)) {
            kt = entk_for_task(theta, probe, train_ds.task);
            have_kt = true;
            row.entk_drift = frobenius_diff(kt, k0);
        }
        if (probing && res.grok.t1 < 0 && row.train_acc == 1.0) {
            res.grok.t1 = t;
            if (!have_kt) {
                kt = entk_for_task(theta, probe, train_ds.task);
                have_kt = true;
            }
            k_t1 = kt;
            res.grok.drift_pre = frobenius_diff(k_t1, k0);
        }
        if (res.grok.t2 < 0 && row.test_acc >= 0.99) res.grok.t2 = t;

        res.metrics.push_back(row);

        if (!std::isfinite(row.train_loss) || !std::isfinite(row.grad_l2)) {
            res.aborted = true;
            res.abort_step = t;
            break;
        }
        if (t == cfg.steps) {
            if (probing && res.grok.t1 >= 0)
                res.grok.drift_post = frobenius_diff(have_kt ? kt : entk_for_task(theta, probe, train_ds.task), k_t1);
            break;
        }

        // theta <- theta - lr * (data_grad [normalized] + reg subgradient)
        if (cfg.normalized && row.grad_l2 >= 1e-12) scale_params(grad, 1.0 / row.grad_l2);
        if (cfg.lambda_inf > 0.0)
            axpy_params(1.0, linf_reg_subgradient(theta, cfg.lambda_inf), grad);
        axpy_params(-cfg.lr, grad, theta);

        if (observer) observer(t + 1, theta);
    }
    return res;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "step,train_loss,test_loss,train_acc,test_acc,linf_norm,grad_l2,entk_drift\n";
    char buf[512];
    for (const MetricsRow& r : rows) {
        int len = std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,",
                                r.step, r.train_loss, r.test_loss, r.train_acc, r.test_acc,
                                r.linf_norm, r.grad_l2);
        out.write(buf, len);
        if (r.entk_drift) {
            len = std::snprintf(buf, sizeof buf, "%.17g", *r.entk_drift);
            out.write(buf, len);
        }
        out.put('\n');
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mg
