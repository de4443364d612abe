#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "modgrok/dataset.hpp"
#include "modgrok/quadnet.hpp"

namespace mg {

enum class InitScheme { UniformFanIn };

struct TrainConfig {
    int p = 5;
    int h = 20;
    double lr = 1.0;
    long steps = 1;
    double lambda_inf = 0.0;
    double init_scale = 1.0;  // alpha, multiplies the fan-in uniform draw
    InitScheme init_scheme = InitScheme::UniformFanIn;
    LossKind loss = LossKind::Square;
    bool normalized = false;  // divide the data gradient by its global l2 norm
    std::uint64_t seed = 0;
    long entk_probe_every = 0;  // 0 disables kernel drift probes
    int entk_probe_points = 0;  // 0 -> min(population, 2000)
};

struct MetricsRow {
    long step = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double linf_norm = 0.0;
    double grad_l2 = 0.0;  // data-loss gradient norm at this step's params
    std::optional<double> entk_drift;  // ||K_t - K_0||_F on probe steps
};

// Markers of delayed generalization along one run. t1 = first step with
// train_acc 1.0, t2 = first step with test_acc >= 0.99; drift_pre/post split
// the kernel movement at t1.
struct GrokSignature {
    long t1 = -1;
    long t2 = -1;
    double drift_pre = std::numeric_limits<double>::quiet_NaN();   // ||K_t1 - K_0||_F
    double drift_post = std::numeric_limits<double>::quiet_NaN();  // ||K_end - K_t1||_F
};

struct TrainResult {
    QuadNetParams theta;
    std::vector<MetricsRow> metrics;  // rows for steps 0..steps (pre-update state)
    bool aborted = false;
    long abort_step = -1;
    GrokSignature grok;  // populated when entk_probe_every > 0
};

// Called with (t, theta_t) for t = 0..steps; theta_t is the state after t
// updates. Lets tests pair trajectories without touching the loop.
using StepObserver = std::function<void(long, const QuadNetParams&)>;

// W entries ~ alpha * U(+-sqrt(1/2p)), V entries ~ alpha * U(+-sqrt(1/h));
// deterministic in cfg.seed.
QuadNetParams init_params(int p, int h, const TrainConfig& cfg);

// Subgradient of lambda * ||theta||_inf: lambda split equally over every
// entry within rel 1e-12 of the max magnitude, signed; zero at theta = 0.
QuadNetParams linf_reg_subgradient(const QuadNetParams& theta, double lambda_inf);

TrainResult train(const TrainConfig& cfg, const ModAddDataset& train_ds,
                  const ModAddDataset& test_ds, const QuadNetParams* theta0 = nullptr,
                  const StepObserver& observer = {});

// Fixed header: step,train_loss,test_loss,train_acc,test_acc,linf_norm,grad_l2,entk_drift
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace mg
