#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "modgrok/equivariance.hpp"
#include "modgrok/fourier.hpp"
#include "modgrok/permutation.hpp"
#include "modgrok/quadnet.hpp"
#include "modgrok/rng.hpp"
#include "modgrok/trainer.hpp"

using namespace mg;

namespace {

QuadNetParams random_params(int p, int h, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.p = p;
    cfg.h = h;
    cfg.seed = seed;
    cfg.init_scale = 0.8;
    return init_params(p, h, cfg);
}

}  // namespace

TEST_SUITE_BEGIN("equivariance");

TEST_CASE("permutation triples: identity, validity, compose, inverse") {
    auto rng = stream(11, "perm.unit");
    PermTriple id = identity_perm(7);
    CHECK(id.valid());
    for (int i = 0; i < 7; ++i) {
        CHECK(id.s1[std::size_t(i)] == i);
        CHECK(id.s3[std::size_t(i)] == i);
    }

    PermTriple t = random_perm_triple(rng, 7);
    CHECK(t.valid());
    PermTriple tinv = inverse(t);
    PermTriple both = compose(t, tinv);
    for (int i = 0; i < 7; ++i) {
        CHECK(both.s1[std::size_t(i)] == i);
        CHECK(both.s2[std::size_t(i)] == i);
        CHECK(both.s3[std::size_t(i)] == i);
    }

    // compose really is f(g(x)) slotwise
    PermTriple u = random_perm_triple(rng, 7);
    PermTriple fu = compose(t, u);
    for (int i = 0; i < 7; ++i)
        CHECK(fu.s2[std::size_t(i)] == t.s2[std::size_t(u.s2[std::size_t(i)])]);

    PermTriple bad = id;
    bad.s1[0] = bad.s1[1];
    CHECK(!bad.valid());
}

TEST_CASE("weight push-forward cancels the data action exactly") {
    const int p = 7;
    auto rng = stream(21, "equi.fwd");
    auto pts = random_triples(p, 60, 77);
    for (int rep = 0; rep < 4; ++rep) {
        QuadNetParams theta = random_params(p, 24, 100 + std::uint64_t(rep));
        PermTriple sigma = random_perm_triple(rng, p);
        CHECK(check_forward_equivariance(theta, sigma, pts) <= 1e-12);
        CHECK(check_gradient_equivariance(theta, sigma, pts) <= 1e-12);
    }
}

TEST_CASE("push-forward composes: tau_{f.g} = tau_f tau_g") {
    const int p = 5;
    auto rng = stream(31, "equi.compose");
    QuadNetParams theta = random_params(p, 16, 9);
    PermTriple f = random_perm_triple(rng, p);
    PermTriple g = random_perm_triple(rng, p);
    QuadNetParams lhs = permute_weights(theta, compose(f, g));
    QuadNetParams rhs = permute_weights(permute_weights(theta, g), f);
    CHECK(max_abs_param_diff(lhs, rhs) == 0.0);
}

TEST_CASE("identity permutation leaves weights and outputs untouched") {
    const int p = 5;
    QuadNetParams theta = random_params(p, 16, 4);
    PermTriple id = identity_perm(p);
    QuadNetParams same = permute_weights(theta, id);
    CHECK(max_abs_param_diff(theta, same) == 0.0);
    auto pts = random_triples(p, 25, 3);
    CHECK(check_forward_equivariance(theta, id, pts) == 0.0);
}

TEST_CASE("push-forward moves the expected rows") {
    const int p = 3, h = 4;
    QuadNetParams theta = random_params(p, h, 1);
    auto rng = stream(5, "equi.rows");
    PermTriple sigma = random_perm_triple(rng, p);
    QuadNetParams moved = permute_weights(theta, sigma);
    for (int j = 0; j < p; ++j)
        for (int k = 0; k < h; ++k) {
            CHECK(moved.wt_row(sigma.s1[std::size_t(j)])[k] == theta.wt_row(j)[k]);
            CHECK(moved.wt_row(sigma.s2[std::size_t(j)] + p)[k] == theta.wt_row(j + p)[k]);
            CHECK(moved.v_row(sigma.s3[std::size_t(j)])[k] == theta.v_row(j)[k]);
        }
}

TEST_CASE("modulus mismatch between weights and permutation throws") {
    QuadNetParams theta = random_params(5, 8, 2);
    PermTriple sigma = identity_perm(7);
    CHECK_THROWS(permute_weights(theta, sigma));
}

TEST_CASE("plain-GD square-loss trajectories stay equivariant") {
    for (int p : {5, 7}) {
        CAPTURE(p);
        ModAddDataset pop = gen_full_population(p, TaskKind::Regression);
        auto rng = stream(std::uint64_t(p), "equi.train.sq");
        PermTriple sigma = random_perm_triple(rng, p);

        TrainConfig cfg;
        cfg.p = p;
        cfg.h = 4 * p;
        cfg.lr = 0.05;
        cfg.steps = 100;
        cfg.seed = 17;
        cfg.loss = LossKind::Square;

        SUBCASE("with l-inf pull") {
            cfg.lambda_inf = 1e-4;
            auto dev = check_training_equivariance(cfg, sigma, pop);
            REQUIRE(dev.size() == 101);
            CHECK(*std::max_element(dev.begin(), dev.end()) <= 1e-9);
        }
        SUBCASE("unregularized") {
            cfg.lambda_inf = 0.0;
            auto dev = check_training_equivariance(cfg, sigma, pop);
            CHECK(*std::max_element(dev.begin(), dev.end()) <= 1e-9);
        }
    }
}

TEST_CASE("normalized-GD cross-entropy trajectories stay equivariant") {
    for (int p : {5, 7}) {
        CAPTURE(p);
        ModAddDataset pop = gen_full_population(p, TaskKind::Classification);
        auto rng = stream(std::uint64_t(p), "equi.train.ce");
        PermTriple sigma = random_perm_triple(rng, p);

        TrainConfig cfg;
        cfg.p = p;
        cfg.h = 4 * p;
        cfg.lr = 0.1;
        cfg.steps = 100;
        cfg.seed = 17;
        cfg.loss = LossKind::CrossEntropy;
        cfg.normalized = true;
        cfg.lambda_inf = 1e-20;

        auto dev = check_training_equivariance(cfg, sigma, pop);
        REQUIRE(dev.size() == 101);
        CHECK(*std::max_element(dev.begin(), dev.end()) <= 1e-6);
    }
}

TEST_SUITE_END();
