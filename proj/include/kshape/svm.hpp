#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kshape/contour.hpp"
#include "kshape/errors.hpp"
#include "kshape/matrix.hpp"
#include "kshape/preshape.hpp"
#include "kshape/rng.hpp"
#include "kshape/roc.hpp"

namespace kshape {

struct train_config {
    double C = 1.0;
    double kkt_tolerance = 1e-3;
    // Iteration budget scales with problem size: max_passes * n pair
    // updates before the solver gives up.
    int max_passes = 10000;
    // With fit_bias=false the equality constraint sum(alpha_i c_i) = 0 is
    // dropped and the decision function has no intercept.
    bool fit_bias = true;
};

inline void validate(const train_config& cfg) {
    if (!(cfg.C > 0.0))
        throw error("C must be > 0, got " + std::to_string(cfg.C));
    if (!(cfg.kkt_tolerance > 0.0))
        throw error("kkt_tolerance must be > 0, got " +
                    std::to_string(cfg.kkt_tolerance));
    if (cfg.max_passes < 1)
        throw error("max_passes must be >= 1, got " +
                    std::to_string(cfg.max_passes));
}

struct dual_solution {
    std::vector<double> alpha; // one per training sample, in [0, C]
    double bias = 0.0;
    double objective = 0.0; // maximized dual: sum(alpha) - alpha'Q alpha / 2
    int iterations = 0;
};

namespace detail {

inline void check_training_inputs(const dmatrix& gram,
                                  std::span<const int> labels,
                                  std::span<const std::size_t> idx) {
    if (gram.rows != gram.cols)
        throw error("gram matrix must be square");
    if (gram.rows != labels.size())
        throw error("gram has " + std::to_string(gram.rows) +
                    " rows but there are " + std::to_string(labels.size()) +
                    " labels");
    if (idx.size() < 2)
        throw error("training needs at least 2 samples, got " +
                    std::to_string(idx.size()));
    bool pos = false, neg = false;
    for (const std::size_t t : idx) {
        if (t >= labels.size())
            throw error("training index " + std::to_string(t) +
                        " out of range");
        if (labels[t] == 1)
            pos = true;
        else if (labels[t] == -1)
            neg = true;
        else
            throw error("labels must be -1 or +1, got " +
                        std::to_string(labels[t]));
    }
    if (!pos || !neg)
        throw single_class("training set contains only one class");
}

// Sequential minimal optimization over the dual
//   min_alpha  alpha'Q alpha / 2 - sum(alpha),  Q_ij = c_i c_j K_ij,
//   0 <= alpha <= C,  sum(alpha_i c_i) = 0,
// restricted to the samples listed in `idx`. Pair selection is the
// second-order rule: i maximizes -c_i G_i over I_up, j maximizes the
// guaranteed objective decrease over I_low. `observer`, when set, is called
// with the dual objective after every accepted update (test hook).
inline dual_solution smo_solve(const dmatrix& gram,
                               std::span<const int> labels,
                               std::span<const std::size_t> idx,
                               const train_config& cfg,
                               const std::function<void(double)>* observer =
                                   nullptr) {
    check_training_inputs(gram, labels, idx);
    validate(cfg);
    const std::size_t n = idx.size();
    const double C = cfg.C;
    constexpr double tau = 1e-12;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // G_t = (Q alpha)_t - 1
    std::vector<int> c(n);
    for (std::size_t t = 0; t < n; ++t) c[t] = labels[idx[t]];
    const auto kern = [&](std::size_t a, std::size_t b) {
        return gram(idx[a], idx[b]);
    };

    const long budget = static_cast<long>(cfg.max_passes) *
                        static_cast<long>(n);
    long iter = 0;
    double gmax = 0.0, gmax2 = 0.0;
    for (; iter < budget; ++iter) {
        // Working set selection.
        gmax = -std::numeric_limits<double>::infinity();
        gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up = (c[t] == 1 && alpha[t] < C) ||
                               (c[t] == -1 && alpha[t] > 0.0);
            if (in_up && -c[t] * grad[t] >= gmax) {
                gmax = -c[t] * grad[t];
                i = t;
            }
        }
        if (i == n) break; // box is fully saturated against one class
        std::size_t j = n;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_low = (c[t] == -1 && alpha[t] < C) ||
                                (c[t] == 1 && alpha[t] > 0.0);
            if (!in_low) continue;
            gmax2 = std::max(gmax2, c[t] * grad[t]);
            const double b_t = gmax + c[t] * grad[t];
            if (b_t <= 0.0) continue;
            double a_t = kern(i, i) + kern(t, t) - 2.0 * kern(i, t);
            if (a_t <= 0.0) a_t = tau;
            const double gain = b_t * b_t / a_t;
            if (gain > best_gain) {
                best_gain = gain;
                j = t;
            }
        }
        if (gmax + gmax2 < cfg.kkt_tolerance || j == n) break;

        // Minimize over the (i, j) slice of the box, keeping
        // c_i alpha_i + c_j alpha_j fixed. A clipped variable is written
        // exactly as 0 or C and its partner recomputed from the conserved
        // sum/difference.
        double quad = kern(i, i) + kern(j, j) - 2.0 * kern(i, j);
        if (quad <= 0.0) quad = tau;
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (c[i] != c[j]) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = C + diff;
                }
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double d_i = alpha[i] - old_ai;
        const double d_j = alpha[j] - old_aj;
        if (d_i == 0.0 && d_j == 0.0) break; // numerically stuck pair
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += c[t] * c[i] * kern(t, i) * d_i +
                       c[t] * c[j] * kern(t, j) * d_j;

        if (observer) {
            double sum_a = 0.0, ag = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                sum_a += alpha[t];
                ag += alpha[t] * grad[t];
            }
            (*observer)(0.5 * (sum_a - ag));
        }
    }
    if (iter >= budget)
        throw not_converged("SMO used all " + std::to_string(budget) +
                            " iterations (max KKT gap " +
                            std::to_string(gmax + gmax2) + ")");

    dual_solution sol;
    sol.alpha = std::move(alpha);
    sol.iterations = static_cast<int>(iter);

    // Bias from free support vectors (b = -c_t G_t on each); with none
    // free, the midpoint of the feasible interval.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t)
        if (sol.alpha[t] > 0.0 && sol.alpha[t] < C) {
            free_sum += -c[t] * grad[t];
            ++free_count;
        }
    if (free_count > 0) {
        sol.bias = free_sum / static_cast<double>(free_count);
    } else {
        double up = -std::numeric_limits<double>::infinity();
        double low = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up = (c[t] == 1 && sol.alpha[t] < C) ||
                               (c[t] == -1 && sol.alpha[t] > 0.0);
            const bool in_low = (c[t] == -1 && sol.alpha[t] < C) ||
                                (c[t] == 1 && sol.alpha[t] > 0.0);
            if (in_up) up = std::max(up, -c[t] * grad[t]);
            if (in_low) low = std::max(low, c[t] * grad[t]);
        }
        sol.bias = (up - low) / 2.0;
    }

    double sum_a = 0.0, ag = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sum_a += sol.alpha[t];
        ag += sol.alpha[t] * grad[t];
    }
    sol.objective = 0.5 * (sum_a - ag);
    return sol;
}

// Coordinate descent for the same dual without the equality constraint
// (fit_bias = false). Picks the coordinate with the largest projected
// gradient, solves it exactly, clamps to the box.
inline dual_solution nobias_solve(const dmatrix& gram,
                                  std::span<const int> labels,
                                  std::span<const std::size_t> idx,
                                  const train_config& cfg) {
    check_training_inputs(gram, labels, idx);
    validate(cfg);
    const std::size_t n = idx.size();
    const double C = cfg.C;
    constexpr double tau = 1e-12;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    std::vector<int> c(n);
    for (std::size_t t = 0; t < n; ++t) c[t] = labels[idx[t]];
    const auto kern = [&](std::size_t a, std::size_t b) {
        return gram(idx[a], idx[b]);
    };

    const long budget = static_cast<long>(cfg.max_passes) *
                        static_cast<long>(n);
    long iter = 0;
    double worst = 0.0;
    for (; iter < budget; ++iter) {
        std::size_t i = n;
        worst = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double pg = grad[t];
            if (alpha[t] <= 0.0)
                pg = std::min(pg, 0.0);
            else if (alpha[t] >= C)
                pg = std::max(pg, 0.0);
            if (std::abs(pg) > worst) {
                worst = std::abs(pg);
                i = t;
            }
        }
        if (i == n || worst < cfg.kkt_tolerance) break;
        double q = kern(i, i);
        if (q <= 0.0) q = tau;
        const double next = std::clamp(alpha[i] - grad[i] / q, 0.0, C);
        const double d = next - alpha[i];
        if (d == 0.0) break;
        alpha[i] = next;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += c[t] * c[i] * kern(t, i) * d;
    }
    if (iter >= budget)
        throw not_converged("coordinate descent used all " +
                            std::to_string(budget) +
                            " iterations (max violation " +
                            std::to_string(worst) + ")");

    dual_solution sol;
    sol.alpha = std::move(alpha);
    sol.bias = 0.0;
    sol.iterations = static_cast<int>(iter);
    double sum_a = 0.0, ag = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sum_a += sol.alpha[t];
        ag += sol.alpha[t] * grad[t];
    }
    sol.objective = 0.5 * (sum_a - ag);
    return sol;
}

} // namespace detail

// Train on the samples listed in `active` (indices into gram/labels);
// alpha[p] in the result belongs to sample active[p].
inline dual_solution train_svm_subset(const dmatrix& gram,
                                      std::span<const int> labels,
                                      std::span<const std::size_t> active,
                                      const train_config& cfg = {}) {
    return cfg.fit_bias ? detail::smo_solve(gram, labels, active, cfg)
                        : detail::nobias_solve(gram, labels, active, cfg);
}

inline dual_solution train_svm(const dmatrix& gram,
                               std::span<const int> labels,
                               const train_config& cfg = {}) {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    return train_svm_subset(gram, labels, all, cfg);
}

// Decision value of a sample already present in the kernel matrix:
// f(q) = sum_p alpha_p c_p K(active_p, q) + b. Used to score a held-out
// column without recomputing kernels.
inline double decision_value_gram(const dmatrix& gram,
                                  std::span<const int> labels,
                                  std::span<const std::size_t> active,
                                  const dual_solution& sol, std::size_t q) {
    if (active.size() != sol.alpha.size())
        throw error("solution has " + std::to_string(sol.alpha.size()) +
                    " coefficients for " + std::to_string(active.size()) +
                    " active samples");
    double f = sol.bias;
    for (std::size_t p = 0; p < active.size(); ++p)
        f += sol.alpha[p] * labels[active[p]] * gram(active[p], q);
    return f;
}

// Largest Karush-Kuhn-Tucker violation of a trained solution, plus the
// residual of the equality constraint. Both should be at round-off /
// tolerance scale after a successful solve.
struct kkt_report {
    double max_violation = 0.0;
    double equality_gap = 0.0; // |sum alpha_i c_i|; 0 when fit_bias = false
};

inline kkt_report kkt_check(const dmatrix& gram, std::span<const int> labels,
                            std::span<const std::size_t> active,
                            const dual_solution& sol,
                            const train_config& cfg = {}) {
    if (active.size() != sol.alpha.size())
        throw error("solution size does not match active set");
    kkt_report rep;
    double eq = 0.0;
    for (std::size_t t = 0; t < active.size(); ++t) {
        const double a = sol.alpha[t];
        const int ct = labels[active[t]];
        eq += a * ct;
        const double cf =
            ct * decision_value_gram(gram, labels, active, sol, active[t]);
        double viol = 0.0;
        if (a <= 0.0)
            viol = std::max(0.0, 1.0 - cf);
        else if (a >= cfg.C)
            viol = std::max(0.0, cf - 1.0);
        else
            viol = std::abs(cf - 1.0);
        rep.max_violation = std::max(rep.max_violation, viol);
    }
    rep.equality_gap = cfg.fit_bias ? std::abs(eq) : 0.0;
    return rep;
}

// Deployable classifier: support landmark sets with their dual weights.
struct svm_model {
    double sigma = 0.0;
    double C = 0.0;
    double bias = 0.0;
    shape_metric metric = shape_metric::indexed;
    std::vector<double> coeffs; // alpha_i * c_i of each support vector
    std::vector<landmark_set> support_landmarks;
    std::vector<pre_shape> support_shapes; // derived, kept for scoring
};

inline svm_model make_model(std::span<const landmark_set> shapes,
                            std::span<const int> labels,
                            const dual_solution& sol, double sigma,
                            const train_config& cfg,
                            shape_metric metric = shape_metric::indexed) {
    if (shapes.size() != labels.size() || shapes.size() != sol.alpha.size())
        throw error("model inputs disagree on sample count");
    if (!(sigma > 0.0))
        throw invalid_sigma("sigma must be > 0, got " + std::to_string(sigma));
    svm_model m;
    m.sigma = sigma;
    m.C = cfg.C;
    m.bias = sol.bias;
    m.metric = metric;
    for (std::size_t t = 0; t < shapes.size(); ++t) {
        if (sol.alpha[t] <= 0.0) continue;
        m.coeffs.push_back(sol.alpha[t] * labels[t]);
        m.support_landmarks.push_back(shapes[t]);
        m.support_shapes.push_back(to_pre_shape(shapes[t]));
    }
    return m;
}

inline double decision_value(const svm_model& m, const pre_shape& query) {
    double f = m.bias;
    for (std::size_t t = 0; t < m.coeffs.size(); ++t) {
        const double k =
            m.metric == shape_metric::cyclic
                ? fp_kernel_cyclic(m.support_shapes[t], query, m.sigma)
                : fp_kernel(m.support_shapes[t], query, m.sigma);
        f += m.coeffs[t] * k;
    }
    return f;
}

inline double decision_value(const svm_model& m, const landmark_set& lm) {
    return decision_value(m, to_pre_shape(lm));
}

struct hyperparams {
    double sigma = 0.0;
    double C = 0.0;
    double cv_auc = 0.0; // pooled CV AUC of the winning pair
};

namespace detail {

// Stratified k-fold assignment: shuffle each class, deal round-robin.
inline std::vector<int> stratified_folds(std::span<const int> labels,
                                         int k, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t t = 0; t < labels.size(); ++t)
        (labels[t] == 1 ? pos : neg).push_back(t);
    rng r(seed);
    r.shuffle(pos);
    r.shuffle(neg);
    std::vector<int> fold(labels.size(), 0);
    for (std::size_t p = 0; p < pos.size(); ++p)
        fold[pos[p]] = static_cast<int>(p % k);
    for (std::size_t p = 0; p < neg.size(); ++p)
        fold[neg[p]] = static_cast<int>(p % k);
    return fold;
}

// Pooled k-fold CV AUC for one (gram, C) pair given a fold assignment.
inline double cv_auc_for(const dmatrix& gram, std::span<const int> labels,
                         std::span<const std::size_t> subset,
                         std::span<const int> fold, int k,
                         const train_config& cfg) {
    score_table pooled;
    for (int f = 0; f < k; ++f) {
        std::vector<std::size_t> tr, te;
        for (const std::size_t t : subset)
            (fold[t] == f ? te : tr).push_back(t);
        if (te.empty()) continue;
        const dual_solution sol = cfg.fit_bias
                                      ? smo_solve(gram, labels, tr, cfg)
                                      : nobias_solve(gram, labels, tr, cfg);
        for (const std::size_t q : te) {
            pooled.labels.push_back(labels[q]);
            pooled.scores.push_back(
                decision_value_gram(gram, labels, tr, sol, q));
        }
    }
    return roc_and_auc(pooled).auc;
}

} // namespace detail

// Pick (sigma, C) by stratified 5-fold cross-validation on pooled scores.
// Ties on AUC go to the larger sigma (smoother kernel), then the smaller C
// (stronger regularization). Grams are built per sigma from `shapes`; with
// single-element grids the pair is returned directly without running CV.
inline hyperparams select_hyperparams(std::span<const pre_shape> shapes,
                                      std::span<const int> labels,
                                      std::span<const double> sigma_grid,
                                      std::span<const double> c_grid,
                                      std::uint64_t seed,
                                      const train_config& base = {},
                                      shape_metric metric =
                                          shape_metric::indexed) {
    if (sigma_grid.empty() || c_grid.empty())
        throw error("hyperparameter grids must be non-empty");
    if (sigma_grid.size() == 1 && c_grid.size() == 1)
        return {sigma_grid[0], c_grid[0], 0.0};
    if (shapes.size() != labels.size())
        throw error("shape/label count mismatch");
    if (shapes.size() < 6)
        throw error("hyperparameter search needs at least 6 samples, got " +
                    std::to_string(shapes.size()));

    constexpr int k = 5;
    const std::vector<int> fold = detail::stratified_folds(labels, k, seed);
    std::vector<std::size_t> all(shapes.size());
    std::iota(all.begin(), all.end(), 0);

    hyperparams best;
    best.cv_auc = -1.0;
    for (const double sigma : sigma_grid) {
        const dmatrix gram = metric == shape_metric::cyclic
                                 ? gram_matrix_cyclic(shapes, sigma)
                                 : gram_matrix(shapes, sigma);
        for (const double C : c_grid) {
            train_config cfg = base;
            cfg.C = C;
            const double auc =
                detail::cv_auc_for(gram, labels, all, fold, k, cfg);
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

} // namespace kshape
