#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <kshape/roc.hpp>

#include "support/oracles.hpp"

using kshape::roc_and_auc;
using kshape::roc_result;
using kshape::score_table;

namespace {

score_table random_table(kshape::rng& r, std::size_t n, int score_levels) {
    // score_levels <= n forces ties.
    score_table t;
    bool pos = false, neg = false;
    for (std::size_t k = 0; k < n; ++k) {
        const int label = r.uniform() < 0.5 ? -1 : 1;
        (label == 1 ? pos : neg) = true;
        t.labels.push_back(label);
        t.scores.push_back(
            static_cast<double>(r.int_in(0, score_levels - 1)) / score_levels);
    }
    if (!pos) t.labels.front() = 1;
    if (!neg) t.labels.back() = -1;
    return t;
}

} // namespace

TEST_CASE("four-sample table by hand", "[roc]") {
    // scores 0.9(+), 0.8(-), 0.7(+), 0.1(-)
    const score_table t{{}, {1, -1, 1, -1}, {0.9, 0.8, 0.7, 0.1}};
    const roc_result r = roc_and_auc(t);

    REQUIRE(r.n_pos == 2);
    REQUIRE(r.n_neg == 2);
    // vertices: (0,0) then (0,.5) (0.9), (.5,.5) (0.8), (.5,1) (0.7), (1,1)
    REQUIRE(r.points.size() == 5);
    CHECK(r.points[0].fpr == 0.0);
    CHECK(r.points[0].tpr == 0.0);
    CHECK(std::isinf(r.points[0].threshold));
    CHECK(r.points[2].fpr == 0.5);
    CHECK(r.points[2].tpr == 0.5);
    CHECK(r.points.back().fpr == 1.0);
    CHECK(r.points.back().tpr == 1.0);

    CHECK(r.auc == Catch::Approx(0.75).margin(1e-15));
    // best corner distance at (fpr, tpr) = (0.5, 1.0), threshold 0.7
    CHECK(r.cutoff == Catch::Approx(0.7).margin(1e-15));
    CHECK(r.sensitivity == Catch::Approx(1.0).margin(1e-15));
    CHECK(r.specificity == Catch::Approx(0.5).margin(1e-15));
    CHECK(r.accuracy == Catch::Approx(0.75).margin(1e-15));
}

TEST_CASE("cutoff rule: predict positive iff score >= cutoff", "[roc]") {
    const score_table t{{}, {1, -1, 1, -1}, {0.9, 0.8, 0.7, 0.1}};
    const roc_result r = roc_and_auc(t);
    // replaying the rule by hand must reproduce the reported metrics
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const bool predicted = t.scores[k] >= r.cutoff;
        if (t.labels[k] == 1)
            (predicted ? tp : fn)++;
        else
            (predicted ? fp : tn)++;
    }
    CHECK(static_cast<double>(tp) / (tp + fn) == r.sensitivity);
    CHECK(static_cast<double>(tn) / (tn + fp) == r.specificity);
    CHECK(static_cast<double>(tp + tn) / t.size() == r.accuracy);
}

TEST_CASE("perfect, inverted and constant scores", "[roc]") {
    const score_table perfect{{}, {-1, -1, 1, 1}, {0.1, 0.2, 0.8, 0.9}};
    CHECK(roc_and_auc(perfect).auc == 1.0);
    const score_table inverted{{}, {-1, -1, 1, 1}, {0.9, 0.8, 0.2, 0.1}};
    CHECK(roc_and_auc(inverted).auc == 0.0);
    const score_table flat{{}, {-1, -1, 1, 1}, {0.5, 0.5, 0.5, 0.5}};
    const roc_result r = roc_and_auc(flat);
    CHECK(r.auc == Catch::Approx(0.5).margin(1e-15));
    // one tie group: exactly (0,0) -> (1,1)
    CHECK(r.points.size() == 2);
}

TEST_CASE("one vertex per distinct score", "[roc]") {
    kshape::rng r(31);
    for (int rep = 0; rep < 20; ++rep) {
        const score_table t = random_table(r, 40, 8);
        const roc_result rr = roc_and_auc(t);
        const std::set<double> distinct(t.scores.begin(), t.scores.end());
        CHECK(rr.points.size() == distinct.size() + 1);
        // thresholds strictly decreasing after the sentinel
        for (std::size_t k = 2; k < rr.points.size(); ++k)
            CHECK(rr.points[k].threshold < rr.points[k - 1].threshold);
        // rates monotone non-decreasing
        for (std::size_t k = 1; k < rr.points.size(); ++k) {
            CHECK(rr.points[k].fpr >= rr.points[k - 1].fpr);
            CHECK(rr.points[k].tpr >= rr.points[k - 1].tpr);
        }
    }
}

TEST_CASE("trapezoidal area equals the Mann-Whitney statistic", "[roc]") {
    kshape::rng r(32);
    for (int rep = 0; rep < 300; ++rep) {
        // mix heavy-tie and mostly-distinct regimes
        const int levels = rep % 2 == 0 ? 5 : 1000;
        const score_table t = random_table(r, 6 + r.index(60), levels);
        const double mw = oracle::mann_whitney_auc(t.labels, t.scores);
        CHECK(std::abs(roc_and_auc(t).auc - mw) <= 1e-12);
    }
}

TEST_CASE("degenerate tables are rejected", "[roc]") {
    CHECK_THROWS_AS(roc_and_auc({{}, {1, 1, 1}, {0.1, 0.2, 0.3}}),
                    kshape::single_class);
    CHECK_THROWS_AS(roc_and_auc({{}, {-1, -1}, {0.1, 0.2}}),
                    kshape::single_class);
    CHECK_THROWS_AS(roc_and_auc({{}, {1, -1}, {0.1}}), kshape::error);
    CHECK_THROWS_AS(roc_and_auc({{}, {1, 0}, {0.1, 0.2}}), kshape::error);
    CHECK_THROWS_AS(roc_and_auc({{"a"}, {1, -1}, {0.1, 0.2}}), kshape::error);
}

TEST_CASE("cutoff tie-breaks favor sensitivity", "[roc]") {
    // two vertices at equal corner distance: (0, .5) and (.5, 1) are both
    // at squared distance 0.25; the second has higher tpr and must win
    const score_table t{{}, {1, 1, -1, -1}, {0.9, 0.6, 0.5, 0.2}};
    const roc_result r = roc_and_auc(t);
    const kshape::cutoff_metrics cm = kshape::select_cutoff(r);
    CHECK(cm.sensitivity == 1.0);
    CHECK(cm.cutoff == Catch::Approx(0.6).margin(1e-15));
    CHECK(cm.cutoff == r.cutoff);
}

TEST_CASE("bootstrap spread behaves like a standard error", "[roc]") {
    kshape::rng gen(33);
    // overlapping classes so the AUC genuinely varies across resamples
    score_table t;
    for (int k = 0; k < 40; ++k) {
        t.labels.push_back(k < 20 ? -1 : 1);
        t.scores.push_back((k < 20 ? 0.0 : 0.6) + gen.normal());
    }
    const kshape::metric_sd sd = kshape::bootstrap_metric_sd(t, 400, 7);
    CHECK(sd.n_used >= 390); // both classes present in almost every draw
    CHECK(sd.auc_sd > 0.0);
    CHECK(sd.auc_sd < 0.25);
    CHECK(sd.accuracy_sd > 0.0);
    CHECK(sd.sensitivity_sd > 0.0);
    CHECK(sd.specificity_sd > 0.0);

    SECTION("same seed reproduces, different seed varies") {
        const kshape::metric_sd again = kshape::bootstrap_metric_sd(t, 400, 7);
        CHECK(again.auc_sd == sd.auc_sd);
        const kshape::metric_sd other = kshape::bootstrap_metric_sd(t, 400, 8);
        CHECK(other.auc_sd != sd.auc_sd);
    }
    SECTION("resample count is validated") {
        CHECK_THROWS_AS(kshape::bootstrap_metric_sd(t, 1, 7), kshape::error);
    }
}

TEST_CASE("bootstrap SD shrinks with sample size", "[roc]") {
    kshape::rng gen(34);
    const auto make = [&](int per_class) {
        score_table t;
        for (int k = 0; k < 2 * per_class; ++k) {
            t.labels.push_back(k < per_class ? -1 : 1);
            t.scores.push_back((k < per_class ? 0.0 : 0.8) + gen.normal());
        }
        return t;
    };
    const double small = kshape::bootstrap_metric_sd(make(15), 300, 5).auc_sd;
    const double large = kshape::bootstrap_metric_sd(make(120), 300, 5).auc_sd;
    CHECK(large < small);
}
