#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kshape/contour.hpp"
#include "kshape/errors.hpp"
#include "kshape/preshape.hpp"
#include "kshape/roc.hpp"
#include "kshape/svm.hpp"

namespace kshape {

// Labeled shape collection; parallel arrays indexed by sample.
struct shape_dataset {
    std::vector<std::string> ids;
    std::vector<int> labels; // -1 benign, +1 malignant
    std::vector<landmark_set> shapes;

    std::size_t size() const { return labels.size(); }
};

inline void validate(const shape_dataset& ds) {
    if (ds.ids.size() != ds.labels.size() ||
        ds.shapes.size() != ds.labels.size())
        throw error("dataset arrays disagree: " + std::to_string(ds.ids.size()) +
                    " ids, " + std::to_string(ds.labels.size()) + " labels, " +
                    std::to_string(ds.shapes.size()) + " shapes");
    for (const int c : ds.labels)
        if (c != -1 && c != 1)
            throw error("labels must be -1 or +1, got " + std::to_string(c));
    for (const landmark_set& lm : ds.shapes) validate(lm);
}

// Leave-one-out decision values from a precomputed kernel matrix: sample i
// is scored by a classifier trained on everything else. Kernel rows are
// reused across folds, so the n kernels-per-pair are computed once, not n
// times.
inline std::vector<double> loocv_scores_gram(const dmatrix& gram,
                                             std::span<const int> labels,
                                             const train_config& cfg,
                                             std::span<const std::string>
                                                 ids = {}) {
    const std::size_t n = labels.size();
    if (n < 3)
        throw error("leave-one-out needs at least 3 samples, got " +
                    std::to_string(n));
    std::vector<double> scores(n, 0.0);
    std::vector<std::size_t> active;
    active.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        active.clear();
        bool pos = false, neg = false;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == i) continue;
            active.push_back(t);
            (labels[t] == 1 ? pos : neg) = true;
        }
        if (!pos || !neg) {
            std::string who = ids.empty() ? std::to_string(i)
                                          : std::string(ids[i]);
            throw single_class("removing sample " + who +
                               " leaves a single-class training set");
        }
        const dual_solution sol = train_svm_subset(gram, labels, active, cfg);
        scores[i] = decision_value_gram(gram, labels, active, sol, i);
    }
    return scores;
}

// Full leave-one-out pass over a dataset at one landmark count and one
// (sigma, C): resampled + canonically indexed shapes, kernel matrix, one
// held-out decision value per sample.
inline score_table loocv(const shape_dataset& ds, int n_landmarks,
                         double sigma, double C,
                         const train_config& base = {},
                         shape_metric metric = shape_metric::indexed) {
    train_config cfg = base;
    cfg.C = C;
    validate(ds);
    if (ds.size() < 3)
        throw error("leave-one-out needs at least 3 samples, got " +
                    std::to_string(ds.size()));

    std::vector<pre_shape> pre;
    pre.reserve(ds.size());
    for (const landmark_set& lm : ds.shapes)
        pre.push_back(to_pre_shape(canonical_start(
            resample_landmarks(lm, n_landmarks))));
    const dmatrix gram = metric == shape_metric::cyclic
                             ? gram_matrix_cyclic(pre, sigma)
                             : gram_matrix(pre, sigma);

    score_table out;
    out.ids = ds.ids;
    out.labels = ds.labels;
    out.scores = loocv_scores_gram(gram, ds.labels, cfg, ds.ids);
    return out;
}

} // namespace kshape
