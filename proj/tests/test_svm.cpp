#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <kshape/preshape.hpp>
#include <kshape/svm.hpp>
#include <kshape/synthetic.hpp>

#include "support/oracles.hpp"

using kshape::dmatrix;
using kshape::dual_solution;
using kshape::pre_shape;
using kshape::train_config;
using kshape::train_svm;

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

// Kernel matrix of random pre-shapes: PSD by construction and the same
// flavor of matrix the solver sees in production.
dmatrix random_gram(kshape::rng& r, std::size_t n, double sigma) {
    std::vector<pre_shape> shapes;
    shapes.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        shapes.push_back(
            kshape::to_pre_shape(oracle::random_smooth_shape(r, 20)));
    return kshape::gram_matrix(shapes, sigma);
}

std::vector<int> random_labels(kshape::rng& r, std::size_t n) {
    std::vector<int> c(n);
    bool pos = false, neg = false;
    for (std::size_t k = 0; k < n; ++k) {
        c[k] = r.uniform() < 0.5 ? -1 : 1;
        (c[k] == 1 ? pos : neg) = true;
    }
    if (!pos) c.front() = 1;
    if (!neg) c.back() = -1;
    return c;
}

dmatrix two_point_gram(double k) {
    dmatrix g(2, 2, 1.0);
    g(0, 1) = k;
    g(1, 0) = k;
    return g;
}

} // namespace

TEST_CASE("two-point problem has a closed form", "[svm]") {
    // labels (+1, -1), K = [[1, k], [k, 1]]: the equality constraint forces
    // alpha_1 = alpha_2 = t, the dual becomes 2t - t^2 (1 - k), so the
    // unconstrained optimum is t* = 1 / (1 - k) with zero bias.
    const double k = 0.2;
    const std::vector<int> labels{1, -1};
    const double t_star = 1.0 / (1.0 - k); // 1.25

    train_config cfg;
    cfg.C = 10.0;
    const dual_solution sol = train_svm(two_point_gram(k), labels, cfg);

    CHECK(sol.alpha[0] == Catch::Approx(t_star).margin(1e-12));
    CHECK(sol.alpha[1] == Catch::Approx(t_star).margin(1e-12));
    CHECK(sol.bias == Catch::Approx(0.0).margin(1e-12));
    CHECK(sol.objective ==
          Catch::Approx(2.0 * t_star - t_star * t_star * (1.0 - k))
              .margin(1e-12));
    // both samples sit exactly on the margin
    const std::vector<std::size_t> idx = all_indices(2);
    for (std::size_t q = 0; q < 2; ++q)
        CHECK(labels[q] * kshape::decision_value_gram(two_point_gram(k),
                                                      labels, idx, sol, q) ==
              Catch::Approx(1.0).margin(1e-9));
    // the independent QP oracle lands on the same point
    const oracle::qp_solution ref =
        oracle::solve_svm_dual(two_point_gram(k), labels, cfg.C, true);
    CHECK(sol.objective == Catch::Approx(ref.objective).margin(1e-9));
}

TEST_CASE("small box clips the two-point solution to the corner", "[svm]") {
    const std::vector<int> labels{1, -1};
    train_config cfg;
    cfg.C = 0.1;
    const dual_solution sol = train_svm(two_point_gram(0.2), labels, cfg);
    CHECK(sol.alpha[0] == 0.1); // written exactly at the bound
    CHECK(sol.alpha[1] == 0.1);
    CHECK(sol.bias == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("dual objective matches an independent QP solver", "[svm]") {
    kshape::rng r(51);
    for (int rep = 0; rep < 6; ++rep) {
        const std::size_t n = 8 + r.index(13); // up to 20
        const dmatrix gram = random_gram(r, n, 0.5);
        const std::vector<int> labels = random_labels(r, n);
        train_config cfg;
        cfg.C = rep % 2 == 0 ? 1.0 : 10.0;
        cfg.kkt_tolerance = 1e-6; // tight so the comparison is meaningful
        const dual_solution sol = train_svm(gram, labels, cfg);
        const oracle::qp_solution ref =
            oracle::solve_svm_dual(gram, labels, cfg.C, true);
        CHECK(sol.objective == Catch::Approx(ref.objective).margin(1e-6));
    }
}

TEST_CASE("trained solutions are dual-feasible and satisfy KKT", "[svm]") {
    kshape::rng r(52);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t n = 10 + r.index(15);
        const dmatrix gram = random_gram(r, n, rep % 2 == 0 ? 0.3 : 1.0);
        const std::vector<int> labels = random_labels(r, n);
        train_config cfg;
        cfg.C = rep % 3 == 0 ? 0.5 : 5.0;
        const dual_solution sol = train_svm(gram, labels, cfg);

        double eq = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            CHECK(sol.alpha[t] >= -1e-15);
            CHECK(sol.alpha[t] <= cfg.C + 1e-9);
            eq += sol.alpha[t] * labels[t];
        }
        CHECK(std::abs(eq) <= 1e-9);

        const std::vector<std::size_t> idx = all_indices(n);
        const kshape::kkt_report rep_kkt =
            kshape::kkt_check(gram, labels, idx, sol, cfg);
        CHECK(rep_kkt.max_violation <= cfg.kkt_tolerance + 1e-12);
        CHECK(rep_kkt.equality_gap <= 1e-9);

        // free support vectors sit on the margin within tolerance
        for (std::size_t t = 0; t < n; ++t) {
            if (!(sol.alpha[t] > 0.0 && sol.alpha[t] < cfg.C)) continue;
            const double f =
                kshape::decision_value_gram(gram, labels, idx, sol, t);
            CHECK(std::abs(labels[t] * f - 1.0) <=
                  cfg.kkt_tolerance + 1e-12);
        }
    }
}

TEST_CASE("dual objective never decreases across updates", "[svm]") {
    kshape::rng r(53);
    const std::size_t n = 24;
    const dmatrix gram = random_gram(r, n, 0.4);
    const std::vector<int> labels = random_labels(r, n);
    std::vector<double> trace;
    const std::function<void(double)> observer = [&](double w) {
        trace.push_back(w);
    };
    train_config cfg;
    cfg.C = 5.0;
    kshape::detail::smo_solve(gram, labels, all_indices(n), cfg, &observer);
    REQUIRE(trace.size() >= 2);
    for (std::size_t k = 1; k < trace.size(); ++k)
        CHECK(trace[k] >= trace[k - 1] - 1e-9);
}

TEST_CASE("no-bias mode drops the equality constraint", "[svm]") {
    kshape::rng r(54);
    for (int rep = 0; rep < 4; ++rep) {
        const std::size_t n = 8 + r.index(10);
        const dmatrix gram = random_gram(r, n, 0.5);
        const std::vector<int> labels = random_labels(r, n);
        train_config cfg;
        cfg.C = 2.0;
        cfg.fit_bias = false;
        cfg.kkt_tolerance = 1e-6;
        const dual_solution sol = train_svm(gram, labels, cfg);
        CHECK(sol.bias == 0.0);
        for (const double a : sol.alpha) {
            CHECK(a >= -1e-15);
            CHECK(a <= cfg.C + 1e-9);
        }
        const oracle::qp_solution ref =
            oracle::solve_svm_dual(gram, labels, cfg.C, false);
        CHECK(sol.objective == Catch::Approx(ref.objective).margin(1e-6));
        const kshape::kkt_report k =
            kshape::kkt_check(gram, labels, all_indices(n), sol, cfg);
        CHECK(k.equality_gap == 0.0);
    }
}

TEST_CASE("training input validation", "[svm]") {
    const dmatrix gram(3, 3, 1.0);
    SECTION("single class") {
        CHECK_THROWS_AS(train_svm(gram, std::vector<int>{1, 1, 1}, {}),
                        kshape::single_class);
    }
    SECTION("bad label value") {
        CHECK_THROWS_AS(train_svm(gram, std::vector<int>{1, 0, -1}, {}),
                        kshape::error);
    }
    SECTION("size mismatch") {
        CHECK_THROWS_AS(train_svm(gram, std::vector<int>{1, -1}, {}),
                        kshape::error);
    }
    SECTION("bad config") {
        train_config cfg;
        cfg.C = 0.0;
        CHECK_THROWS_AS(validate(cfg), kshape::error);
        cfg = {};
        cfg.kkt_tolerance = -1.0;
        CHECK_THROWS_AS(validate(cfg), kshape::error);
        cfg = {};
        cfg.max_passes = 0;
        CHECK_THROWS_AS(validate(cfg), kshape::error);
    }
}

TEST_CASE("exhausting the iteration budget reports non-convergence",
          "[svm]") {
    kshape::rng r(55);
    const std::size_t n = 40;
    const dmatrix gram = random_gram(r, n, 0.2);
    const std::vector<int> labels = random_labels(r, n);
    train_config cfg;
    cfg.C = 100.0;
    cfg.kkt_tolerance = 1e-12;
    cfg.max_passes = 1;
    CHECK_THROWS_AS(train_svm(gram, labels, cfg), kshape::not_converged);
}

TEST_CASE("model stores only support vectors, weights balance", "[svm]") {
    kshape::rng r(56);
    const std::size_t n = 30;
    std::vector<kshape::landmark_set> raw;
    std::vector<pre_shape> shapes;
    for (std::size_t k = 0; k < n; ++k) {
        raw.push_back(oracle::random_smooth_shape(r, 25));
        shapes.push_back(kshape::to_pre_shape(raw.back()));
    }
    const std::vector<int> labels = random_labels(r, n);
    const double sigma = 0.4;
    const dmatrix gram = kshape::gram_matrix(shapes, sigma);
    train_config cfg;
    cfg.C = 2.0;
    const dual_solution sol = train_svm(gram, labels, cfg);
    const kshape::svm_model model =
        kshape::make_model(raw, labels, sol, sigma, cfg);

    std::size_t expected = 0;
    for (const double a : sol.alpha)
        if (a > 0.0) ++expected;
    REQUIRE(model.coeffs.size() == expected);
    REQUIRE(model.support_landmarks.size() == expected);

    double sum = 0.0;
    for (const double b : model.coeffs) {
        CHECK(b != 0.0);
        CHECK(std::abs(b) <= cfg.C + 1e-9);
        sum += b;
    }
    CHECK(std::abs(sum) <= 1e-9);

    // model scoring agrees with gram-based scoring on every sample
    const std::vector<std::size_t> idx = all_indices(n);
    for (std::size_t q = 0; q < n; ++q)
        CHECK(kshape::decision_value(model, shapes[q]) ==
              Catch::Approx(kshape::decision_value_gram(gram, labels, idx,
                                                        sol, q))
                  .margin(1e-12));
}

TEST_CASE("single support vector scores its own shape as 1", "[svm]") {
    kshape::rng r(57);
    const kshape::landmark_set lm = oracle::random_smooth_shape(r, 20);
    kshape::svm_model m;
    m.sigma = 0.5;
    m.C = 1.0;
    m.bias = 0.0;
    m.coeffs = {1.0};
    m.support_landmarks = {lm};
    m.support_shapes = {kshape::to_pre_shape(lm)};
    CHECK(kshape::decision_value(m, lm) == 1.0); // K(z, z) = 1 exactly
}

TEST_CASE("decision values are similarity-invariant", "[svm]") {
    kshape::rng r(58);
    const std::size_t n = 16;
    std::vector<kshape::landmark_set> raw;
    std::vector<pre_shape> shapes;
    for (std::size_t k = 0; k < n; ++k) {
        raw.push_back(oracle::random_smooth_shape(r, 22));
        shapes.push_back(kshape::to_pre_shape(raw.back()));
    }
    const std::vector<int> labels = random_labels(r, n);
    const dmatrix gram = kshape::gram_matrix(shapes, 0.5);
    train_config cfg;
    const dual_solution sol = train_svm(gram, labels, cfg);
    const kshape::svm_model model =
        kshape::make_model(raw, labels, sol, 0.5, cfg);

    for (int rep = 0; rep < 10; ++rep) {
        const kshape::landmark_set query = oracle::random_smooth_shape(r, 22);
        const oracle::random_similarity s = oracle::draw_similarity(r);
        const kshape::landmark_set moved =
            kshape::similarity_transform(query, s.scale, s.angle, s.offset);
        CHECK(std::abs(kshape::decision_value(model, query) -
                       kshape::decision_value(model, moved)) <= 1e-9);
    }
}

TEST_CASE("hyperparameter search basics", "[svm]") {
    SECTION("singleton grids skip cross-validation") {
        // too few samples for CV, but pinned grids never reach it
        std::vector<pre_shape> shapes;
        std::vector<int> labels{1, -1};
        const std::vector<double> sg{0.3}, cg{2.0};
        const kshape::hyperparams h =
            kshape::select_hyperparams(shapes, labels, sg, cg, 9);
        CHECK(h.sigma == 0.3);
        CHECK(h.C == 2.0);
    }
    SECTION("empty grids are rejected") {
        std::vector<pre_shape> shapes;
        std::vector<int> labels;
        const std::vector<double> none;
        const std::vector<double> some{1.0};
        CHECK_THROWS_AS(
            kshape::select_hyperparams(shapes, labels, none, some, 0),
            kshape::error);
        CHECK_THROWS_AS(
            kshape::select_hyperparams(shapes, labels, some, none, 0),
            kshape::error);
    }
}

TEST_CASE("hyperparameter search separates an easy dataset", "[svm]") {
    kshape::synth_config cfg;
    cfg.n_benign = 15;
    cfg.n_malignant = 15;
    cfg.n_landmarks = 60;
    cfg.seed = 59;
    const kshape::shape_dataset ds = kshape::gen_dataset(cfg);
    std::vector<pre_shape> shapes;
    for (const kshape::landmark_set& lm : ds.shapes)
        shapes.push_back(kshape::to_pre_shape(kshape::canonical_start(
            kshape::resample_landmarks(lm, 40))));
    const std::vector<double> sg{0.1, 0.5};
    const std::vector<double> cg{1.0, 10.0};
    const kshape::hyperparams h =
        kshape::select_hyperparams(shapes, ds.labels, sg, cg, 60);
    CHECK(h.cv_auc >= 0.95);

    SECTION("same seed, same selection") {
        const kshape::hyperparams again =
            kshape::select_hyperparams(shapes, ds.labels, sg, cg, 60);
        CHECK(again.sigma == h.sigma);
        CHECK(again.C == h.C);
        CHECK(again.cv_auc == h.cv_auc);
    }
}
