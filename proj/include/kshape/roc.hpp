#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "kshape/errors.hpp"
#include "kshape/rng.hpp"

namespace kshape {

// One decision value per sample. `ids` may be left empty when the table is
// an intermediate (e.g. cross-validation folds); when present it must be
// aligned with labels/scores. Labels are -1 (benign) / +1 (malignant).
struct score_table {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<double> scores;

    std::size_t size() const { return labels.size(); }
};

inline void validate(const score_table& t) {
    if (t.labels.size() != t.scores.size())
        throw error("score table has " + std::to_string(t.labels.size()) +
                    " labels but " + std::to_string(t.scores.size()) +
                    " scores");
    if (!t.ids.empty() && t.ids.size() != t.labels.size())
        throw error("score table has " + std::to_string(t.ids.size()) +
                    " ids but " + std::to_string(t.labels.size()) + " labels");
    for (const int c : t.labels)
        if (c != -1 && c != 1)
            throw error("labels must be -1 or +1, got " + std::to_string(c));
}

// One ROC vertex: operating point of the rule "predict positive iff
// score >= threshold".
struct roc_point {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct roc_result {
    std::vector<roc_point> points; // (0,0,+inf) first, (1,1,min score) last
    double auc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    // Operating point closest to (fpr, tpr) = (0, 1), see select_cutoff().
    double cutoff = 0.0;
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

namespace detail {

// Vertex with exact counts, kept internal so derived rates never round-trip
// through division twice.
struct roc_vertex {
    std::size_t fp = 0;
    std::size_t tp = 0;
    double threshold = 0.0;
};

inline std::vector<roc_vertex> roc_vertices(const score_table& t,
                                            std::size_t& n_pos,
                                            std::size_t& n_neg) {
    validate(t);
    n_pos = static_cast<std::size_t>(
        std::count(t.labels.begin(), t.labels.end(), 1));
    n_neg = t.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw single_class("ROC needs both classes, got " +
                           std::to_string(n_pos) + " positive and " +
                           std::to_string(n_neg) + " negative");

    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return t.scores[a] > t.scores[b];
    });

    std::vector<roc_vertex> verts;
    verts.push_back({0, 0, std::numeric_limits<double>::infinity()});
    std::size_t fp = 0, tp = 0, i = 0;
    while (i < order.size()) {
        const double s = t.scores[order[i]];
        // Whole tie group moves as one step; no vertex inside a group.
        while (i < order.size() && t.scores[order[i]] == s) {
            if (t.labels[order[i]] == 1)
                ++tp;
            else
                ++fp;
            ++i;
        }
        verts.push_back({fp, tp, s});
    }
    return verts;
}

} // namespace detail

// Operating point whose ROC vertex is closest to the ideal corner
// (fpr, tpr) = (0, 1); ties prefer higher sensitivity, then the lower
// threshold. Metrics follow "predict positive iff score >= cutoff".
struct cutoff_metrics {
    double cutoff = 0.0;
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

inline cutoff_metrics select_cutoff(const roc_result& r) {
    if (r.points.empty() || r.n_pos == 0 || r.n_neg == 0)
        throw error("select_cutoff needs a populated ROC result");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        const roc_point& p = r.points[k];
        const double d = p.fpr * p.fpr + (1.0 - p.tpr) * (1.0 - p.tpr);
        const bool better =
            d < best_d ||
            (d == best_d && (p.tpr > r.points[best].tpr ||
                             (p.tpr == r.points[best].tpr &&
                              p.threshold < r.points[best].threshold)));
        if (better) {
            best = k;
            best_d = d;
        }
    }
    const roc_point& p = r.points[best];
    const double np = static_cast<double>(r.n_pos);
    const double nn = static_cast<double>(r.n_neg);
    cutoff_metrics cm;
    cm.cutoff = p.threshold;
    cm.sensitivity = p.tpr;
    cm.specificity = 1.0 - p.fpr;
    cm.accuracy = (p.tpr * np + (1.0 - p.fpr) * nn) / (np + nn);
    return cm;
}

// ROC curve by threshold sweep over the distinct scores, area by the
// trapezoidal rule. The area equals the Mann-Whitney statistic
//   P(score_pos > score_neg) + P(score_pos = score_neg) / 2.
inline roc_result roc_and_auc(const score_table& t) {
    roc_result r;
    const std::vector<detail::roc_vertex> verts =
        detail::roc_vertices(t, r.n_pos, r.n_neg);

    r.points.reserve(verts.size());
    for (const detail::roc_vertex& v : verts)
        r.points.push_back({static_cast<double>(v.fp) / r.n_neg,
                            static_cast<double>(v.tp) / r.n_pos,
                            v.threshold});

    double auc = 0.0;
    for (std::size_t k = 1; k < r.points.size(); ++k) {
        const roc_point& a = r.points[k - 1];
        const roc_point& b = r.points[k];
        auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    r.auc = auc;

    const cutoff_metrics cm = select_cutoff(r);
    r.cutoff = cm.cutoff;
    r.accuracy = cm.accuracy;
    r.sensitivity = cm.sensitivity;
    r.specificity = cm.specificity;
    return r;
}

// Bootstrap standard deviations of AUC and cutoff metrics: resample the
// score table with replacement, recompute, take the sample SD. Resamples
// that come out single-class are skipped (counted in `n_used`).
struct metric_sd {
    double auc_sd = 0.0;
    double accuracy_sd = 0.0;
    double sensitivity_sd = 0.0;
    double specificity_sd = 0.0;
    std::size_t n_used = 0;
};

inline metric_sd bootstrap_metric_sd(const score_table& t, int resamples,
                                     std::uint64_t seed) {
    validate(t);
    if (resamples < 2) throw error("bootstrap needs at least 2 resamples");
    rng r(seed);
    const std::size_t n = t.size();
    std::vector<double> aucs, accs, sens, specs;
    aucs.reserve(resamples);
    score_table draw;
    draw.labels.resize(n);
    draw.scores.resize(n);
    for (int b = 0; b < resamples; ++b) {
        bool has_pos = false, has_neg = false;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t j = r.index(n);
            draw.labels[k] = t.labels[j];
            draw.scores[k] = t.scores[j];
            (draw.labels[k] == 1 ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        const roc_result rr = roc_and_auc(draw);
        aucs.push_back(rr.auc);
        accs.push_back(rr.accuracy);
        sens.push_back(rr.sensitivity);
        specs.push_back(rr.specificity);
    }
    auto sd = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double mean =
            std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (const double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / (v.size() - 1));
    };
    return {sd(aucs), sd(accs), sd(sens), sd(specs), aucs.size()};
}

} // namespace kshape
