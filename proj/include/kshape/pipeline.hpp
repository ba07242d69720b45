#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kshape/contour.hpp"
#include "kshape/delong.hpp"
#include "kshape/errors.hpp"
#include "kshape/loocv.hpp"
#include "kshape/preshape.hpp"
#include "kshape/roc.hpp"
#include "kshape/svm.hpp"

namespace kshape {

struct eval_options {
    std::vector<int> landmark_counts{25, 50, 100, 200};
    std::vector<double> sigma_grid{0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
    std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
    std::uint64_t seed = 1;
    // false: pick (sigma, C) once per landmark count by 5-fold CV on the
    // full dataset, then run leave-one-out with that pair (cheap; the
    // selection sees each sample, so treat the AUC as mildly optimistic).
    // true: re-select inside every leave-one-out fold (unbiased, slower).
    bool nested_cv = false;
    train_config train;
    shape_metric metric = shape_metric::indexed;
    int bootstrap_resamples = 2000;
};

inline void validate(const eval_options& opt) {
    if (opt.landmark_counts.empty())
        throw error("need at least one landmark count");
    for (const int n : opt.landmark_counts)
        if (n < 3)
            throw too_few_landmarks("landmark count must be >= 3, got " +
                                    std::to_string(n));
    if (opt.sigma_grid.empty() || opt.c_grid.empty())
        throw error("hyperparameter grids must be non-empty");
    for (const double s : opt.sigma_grid)
        if (!(s > 0.0))
            throw invalid_sigma("sigma must be > 0, got " + std::to_string(s));
    for (const double c : opt.c_grid)
        if (!(c > 0.0)) throw error("C must be > 0, got " + std::to_string(c));
    if (opt.bootstrap_resamples < 2)
        throw error("bootstrap needs at least 2 resamples");
    validate(opt.train);
}

// Everything measured at one landmark count.
struct count_evaluation {
    int n_landmarks = 0;
    double sigma = 0.0; // winning pair; modal across folds when nested
    double C = 0.0;
    double cv_auc = 0.0; // selection-stage CV AUC (0 when grids are pinned)
    score_table scores;  // one leave-one-out decision value per sample
    roc_result roc;
    metric_sd spread; // bootstrap SDs of AUC / accuracy / sens / spec
};

struct pairwise_delong {
    int count_a = 0;
    int count_b = 0;
    delong_result test;
};

struct evaluation_run {
    std::vector<count_evaluation> per_count;
    std::vector<pairwise_delong> pairs; // all landmark-count pairs, a < b
};

namespace detail {

struct selected_pair {
    double sigma = 0.0, C = 0.0, cv_auc = 0.0;
};

// select_hyperparams restricted to `subset`, reusing per-sigma grams.
inline selected_pair select_on_subset(std::span<const dmatrix> grams,
                                      std::span<const double> sigma_grid,
                                      std::span<const double> c_grid,
                                      std::span<const int> labels,
                                      std::span<const std::size_t> subset,
                                      std::uint64_t seed,
                                      const train_config& base) {
    std::vector<int> sub_labels;
    sub_labels.reserve(subset.size());
    for (const std::size_t t : subset) sub_labels.push_back(labels[t]);
    constexpr int k = 5;
    const std::vector<int> sub_fold =
        stratified_folds(sub_labels, k, seed);
    std::vector<int> fold(labels.size(), -1);
    for (std::size_t p = 0; p < subset.size(); ++p)
        fold[subset[p]] = sub_fold[p];

    selected_pair best;
    best.cv_auc = -1.0;
    for (std::size_t si = 0; si < sigma_grid.size(); ++si) {
        for (const double C : c_grid) {
            train_config cfg = base;
            cfg.C = C;
            const double auc =
                cv_auc_for(grams[si], labels, subset, fold, k, cfg);
            const double sigma = sigma_grid[si];
            const bool better =
                auc > best.cv_auc ||
                (auc == best.cv_auc &&
                 (sigma > best.sigma ||
                  (sigma == best.sigma && C < best.C)));
            if (better) best = {sigma, C, auc};
        }
    }
    return best;
}

} // namespace detail

// Full study on one dataset: for every landmark count, resample ->
// canonical start -> pre-shapes -> (sigma, C) selection -> leave-one-out
// scores -> ROC/AUC with bootstrap spread; then DeLong tests between every
// pair of landmark counts. Deterministic for a fixed (dataset, options).
inline evaluation_run evaluate_dataset(const shape_dataset& ds,
                                       const eval_options& opt) {
    validate(ds);
    validate(opt);
    if (ds.size() < 6)
        throw error("evaluation needs at least 6 samples, got " +
                    std::to_string(ds.size()));
    const std::size_t n = ds.size();

    evaluation_run run;
    for (std::size_t ci = 0; ci < opt.landmark_counts.size(); ++ci) {
        const int count = opt.landmark_counts[ci];
        std::vector<pre_shape> pre;
        pre.reserve(n);
        for (const landmark_set& lm : ds.shapes)
            pre.push_back(to_pre_shape(canonical_start(
                resample_landmarks(lm, count))));

        // One gram per sigma, shared by selection and scoring.
        std::vector<dmatrix> grams;
        grams.reserve(opt.sigma_grid.size());
        for (const double sigma : opt.sigma_grid)
            grams.push_back(opt.metric == shape_metric::cyclic
                                ? gram_matrix_cyclic(pre, sigma)
                                : gram_matrix(pre, sigma));
        const auto gram_index = [&](double sigma) {
            const auto it = std::find(opt.sigma_grid.begin(),
                                      opt.sigma_grid.end(), sigma);
            return static_cast<std::size_t>(it - opt.sigma_grid.begin());
        };

        count_evaluation ev;
        ev.n_landmarks = count;
        ev.scores.ids = ds.ids;
        ev.scores.labels = ds.labels;
        ev.scores.scores.assign(n, 0.0);

        const bool pinned =
            opt.sigma_grid.size() == 1 && opt.c_grid.size() == 1;
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);

        if (pinned || !opt.nested_cv) {
            detail::selected_pair pick{opt.sigma_grid[0], opt.c_grid[0], 0.0};
            if (!pinned)
                pick = detail::select_on_subset(
                    grams, opt.sigma_grid, opt.c_grid, ds.labels, all,
                    derive_seed(opt.seed, 1000 + ci), opt.train);
            ev.sigma = pick.sigma;
            ev.C = pick.C;
            ev.cv_auc = pick.cv_auc;
            train_config cfg = opt.train;
            cfg.C = pick.C;
            ev.scores.scores = loocv_scores_gram(
                grams[gram_index(pick.sigma)], ds.labels, cfg, ds.ids);
        } else {
            // Nested: an inner 5-fold selection per held-out sample.
            std::map<std::pair<double, double>, int> votes;
            std::vector<std::size_t> active(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                active.clear();
                for (std::size_t t = 0; t < n; ++t)
                    if (t != i) active.push_back(t);
                const detail::selected_pair pick = detail::select_on_subset(
                    grams, opt.sigma_grid, opt.c_grid, ds.labels, active,
                    derive_seed(opt.seed, 1000 + ci), opt.train);
                ++votes[{pick.sigma, pick.C}];
                train_config cfg = opt.train;
                cfg.C = pick.C;
                const dual_solution sol = train_svm_subset(
                    grams[gram_index(pick.sigma)], ds.labels, active, cfg);
                ev.scores.scores[i] = decision_value_gram(
                    grams[gram_index(pick.sigma)], ds.labels, active, sol, i);
            }
            // Report the modal fold-level choice.
            int best_votes = -1;
            for (const auto& [pair, v] : votes)
                if (v > best_votes) {
                    best_votes = v;
                    ev.sigma = pair.first;
                    ev.C = pair.second;
                }
        }

        ev.roc = roc_and_auc(ev.scores);
        ev.spread = bootstrap_metric_sd(ev.scores, opt.bootstrap_resamples,
                                        derive_seed(opt.seed, 7000 + ci));
        run.per_count.push_back(std::move(ev));
    }

    for (std::size_t a = 0; a < run.per_count.size(); ++a)
        for (std::size_t b = a + 1; b < run.per_count.size(); ++b)
            run.pairs.push_back({run.per_count[a].n_landmarks,
                                 run.per_count[b].n_landmarks,
                                 delong_test(run.per_count[a].scores,
                                             run.per_count[b].scores)});
    return run;
}

} // namespace kshape
