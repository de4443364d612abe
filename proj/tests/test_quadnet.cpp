#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "modgrok/dataset.hpp"
#include "modgrok/fourier.hpp"
#include "modgrok/quadnet.hpp"
#include "modgrok/rng.hpp"
#include "modgrok/trainer.hpp"

using namespace mg;

namespace {

QuadNetParams random_params(int p, int h, std::uint64_t seed, double scale = 1.0) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.init_scale = scale;
    return init_params(p, h, cfg);
}

// mean data loss as a plain function of theta, for finite differencing
double loss_at(const QuadNetParams& t, const ModAddDataset& ds, LossKind loss) {
    Workspace ws;
    QuadNetParams g = QuadNetParams::zeros(t.p, t.h);
    return grad_batch_ws(t, ds, loss, ws, g);
}

}  // namespace

TEST_SUITE_BEGIN("quadnet");

TEST_CASE("forward matches explicit one-hot matrix products") {
    QuadNetParams t = random_params(7, 24, 5);
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) {
            std::vector<double> fast = forward_class(t, a, b);
            std::vector<double> slow = forward_class_onehot(t, a, b);
            for (int c = 0; c < 7; ++c)
                CHECK(fast[std::size_t(c)] ==
                      doctest::Approx(slow[std::size_t(c)]).epsilon(1e-12));
        }
}

TEST_CASE("model is 3-homogeneous") {
    QuadNetParams t = random_params(5, 16, 1);
    QuadNetParams t2 = t;
    scale_params(t2, 2.0);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c)
                CHECK(forward_reg(t2, a, b, c) ==
                      doctest::Approx(8.0 * forward_reg(t, a, b, c)).epsilon(1e-12));
}

TEST_CASE("norm and scale utilities") {
    QuadNetParams t = QuadNetParams::zeros(3, 4);
    CHECK(linf_norm(t) == 0.0);
    t.wt[5] = -2.5;
    t.v[2] = 1.5;
    CHECK(linf_norm(t) == 2.5);
    CHECK(params_sum_sq(t) == doctest::Approx(2.5 * 2.5 + 1.5 * 1.5));
    scale_params(t, -2.0);
    CHECK(t.wt[5] == 5.0);
    CHECK(linf_norm(t) == 5.0);
    zero_params(t);
    CHECK(params_sum_sq(t) == 0.0);
}

// Central finite differences at 100 pseudorandomly chosen coordinates; the
// analytic batch gradient must match to 1e-6 relative for both losses.
TEST_CASE("batch gradient vs central finite differences, both losses") {
    const int p = 5, h = 16;
    for (LossKind loss : {LossKind::Square, LossKind::CrossEntropy}) {
        CAPTURE(loss == LossKind::Square ? "square" : "ce");
        TaskKind task = loss == LossKind::Square ? TaskKind::Regression : TaskKind::Classification;
        ModAddDataset pop = gen_full_population(p, task);
        auto [ds, rest] = sample_split(pop, pop.size() / 2, 11);
        QuadNetParams t = random_params(p, h, 33);

        auto [l0, grad] = grad_batch(t, ds, loss);
        CHECK(std::isfinite(l0));

        RngStream coords = stream(77, "fd.coords");
        const double eps = 1e-5;
        const std::size_t np = t.num_params();
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t idx = std::size_t(coords.next_below(np));
            double* slot = idx < t.wt.size() ? &t.wt[idx] : &t.v[idx - t.wt.size()];
            double g_analytic =
                idx < t.wt.size() ? grad.wt[idx] : grad.v[idx - t.wt.size()];
            double keep = *slot;
            *slot = keep + eps;
            double lp = loss_at(t, ds, loss);
            *slot = keep - eps;
            double lm = loss_at(t, ds, loss);
            *slot = keep;
            double g_fd = (lp - lm) / (2 * eps);
            double denom = std::max({std::abs(g_fd), std::abs(g_analytic), 1e-8});
            CHECK(std::abs(g_fd - g_analytic) / denom < 1e-6);
        }
    }
}

TEST_CASE("single-point gradient touches only the involved rows") {
    const int p = 5, h = 8;
    QuadNetParams t = random_params(p, h, 2);
    DataPoint pt{1, 3, 2, 5.0};
    QuadNetParams g = grad_reg(t, pt, 1.0);
    for (int j = 0; j < 2 * p; ++j) {
        bool touched = (j == 1) || (j == 3 + p);
        for (int k = 0; k < h; ++k) {
            if (!touched) CHECK(g.wt_row(j)[k] == 0.0);
        }
    }
    for (int c = 0; c < p; ++c) {
        if (c == 2) continue;
        for (int k = 0; k < h; ++k) CHECK(g.v_row(c)[k] == 0.0);
    }
    // and du/dV matches the definition: dg/dV[c,k] = u_k^2
    for (int k = 0; k < h; ++k) {
        double u = t.wt_row(1)[k] + t.wt_row(3 + p)[k];
        CHECK(g.v_row(2)[k] == doctest::Approx(u * u).epsilon(1e-12));
        CHECK(g.wt_row(1)[k] == doctest::Approx(2 * t.v_row(2)[k] * u).epsilon(1e-12));
        CHECK(g.wt_row(3 + p)[k] == g.wt_row(1)[k]);
    }
}

TEST_CASE("cross-entropy at zero params is ln p and accuracy is argmax-0") {
    const int p = 7;
    QuadNetParams t = QuadNetParams::zeros(p, 12);
    ModAddDataset pop = gen_full_population(p, TaskKind::Classification);
    EvalMetrics m = eval_metrics(t, pop, LossKind::CrossEntropy);
    CHECK(m.loss == doctest::Approx(std::log(double(p))).epsilon(1e-12));
    // all logits tie at 0 -> argmax picks class 0 -> correct for pairs with a+b=0
    CHECK(m.acc == doctest::Approx(1.0 / p).epsilon(1e-12));
}

TEST_CASE("gradient is zero at the analytic interpolator (square loss, scale 1/4)") {
    ConstructionSpec spec;
    spec.p = 5;
    spec.variant = ConstructionVariant::EightP;
    spec.output_scale = 0.25;  // 1/(4p) * p = exact regression targets
    QuadNetParams t = build_construction(spec);
    ModAddDataset pop = gen_full_population(5, TaskKind::Regression);
    auto [loss, grad] = grad_batch(t, pop, LossKind::Square);
    CHECK(loss < 1e-25);
    CHECK(std::sqrt(params_sum_sq(grad)) < 1e-11);
}

TEST_CASE("regression metrics from the shared pair table match direct eval") {
    const int p = 5;
    QuadNetParams t = random_params(p, 20, 9);
    ModAddDataset pop = gen_full_population(p, TaskKind::Regression);
    auto [tr, te] = sample_split(pop, 60, 4);
    Workspace ws;
    build_pair_logit_table(t, ws);
    EvalMetrics a = regression_eval_from_table(p, ws.L, te);
    EvalMetrics b = eval_metrics(t, te, LossKind::Square);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
    CHECK(a.acc == b.acc);
}

TEST_CASE("task/loss mismatches throw") {
    QuadNetParams t = random_params(3, 4, 1);
    ModAddDataset reg = gen_full_population(3, TaskKind::Regression);
    ModAddDataset cls = gen_full_population(3, TaskKind::Classification);
    CHECK_THROWS(grad_batch(t, reg, LossKind::CrossEntropy));
    CHECK_THROWS(grad_batch(t, cls, LossKind::Square));
    CHECK_THROWS(eval_metrics(t, reg, LossKind::CrossEntropy));
}

TEST_CASE("margin of the analytic construction is 4p; zero params margin 0") {
    ConstructionSpec spec;
    spec.p = 5;
    QuadNetParams t = build_construction(spec);
    ModAddDataset pop = gen_full_population(5, TaskKind::Classification);
    MarginReport mr = margin(t, pop);
    CHECK(mr.q_min == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(mr.per_point.size() == pop.size());

    QuadNetParams z = QuadNetParams::zeros(5, 4);
    CHECK(margin(z, pop).q_min == 0.0);

    // normalized margin q/linf^3 is invariant under scaling
    QuadNetParams t2 = t;
    scale_params(t2, 3.0);
    MarginReport mr2 = margin(t2, pop);
    double n1 = mr.q_min / std::pow(linf_norm(t), 3);
    double n2 = mr2.q_min / std::pow(linf_norm(t2), 3);
    CHECK(n1 == doctest::Approx(n2).epsilon(1e-9));
    CHECK_THROWS(margin(t, gen_full_population(5, TaskKind::Regression)));
}

TEST_CASE("argmax tie-break picks the smallest index") {
    std::vector<double> x{1.0, 3.0, 3.0, 2.0};
    CHECK(argmax_smallest(x.data(), 4) == 1);
    std::vector<double> y{2.0, 2.0, 2.0};
    CHECK(argmax_smallest(y.data(), 3) == 0);
}

TEST_CASE("checkpoint round trip preserves params and task") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "modgrok_test_ckpt";
    fs::create_directories(dir);
    QuadNetParams t = random_params(5, 12, 3);
    save_checkpoint(t, TaskKind::Classification, (dir / "ck").string());
    auto [back, task] = load_checkpoint((dir / "ck").string());
    CHECK(task == TaskKind::Classification);
    REQUIRE(back.p == t.p);
    REQUIRE(back.h == t.h);
    CHECK(back.wt == t.wt);
    CHECK(back.v == t.v);
    fs::remove_all(dir);
}

TEST_CASE("w row-major transpose round trip") {
    QuadNetParams t = random_params(3, 5, 8);
    std::vector<double> w = to_w_rowmajor(t);
    REQUIRE(w.size() == t.wt.size());
    // w[k][j] must equal wt[j][k]
    for (int k = 0; k < t.h; ++k)
        for (int j = 0; j < 2 * t.p; ++j)
            CHECK(w[std::size_t(k) * 2 * t.p + j] == t.wt_row(j)[k]);
    QuadNetParams t2 = QuadNetParams::zeros(3, 5);
    from_w_rowmajor(t2, w);
    CHECK(t2.wt == t.wt);
}

TEST_SUITE_END();
