#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "kshape/errors.hpp"
#include "kshape/roc.hpp"

namespace kshape {

struct delong_result {
    double auc_a = 0.0;
    double auc_b = 0.0;
    double variance_diff = 0.0; // Var(auc_a - auc_b), clamped at 0
    double z_statistic = 0.0;
    double p_value = 1.0;
};

namespace detail {

inline double mw_psi(double x, double y) {
    if (x > y) return 1.0;
    if (x < y) return 0.0;
    return 0.5;
}

// Placement values of one classifier: v10[i] over positives, v01[j] over
// negatives; the mean of v10 is the Mann-Whitney AUC.
struct placements {
    std::vector<double> v10;
    std::vector<double> v01;
    double auc = 0.0;
};

inline placements placement_values(const std::vector<double>& scores,
                                   const std::vector<std::size_t>& pos,
                                   const std::vector<std::size_t>& neg) {
    placements p;
    p.v10.assign(pos.size(), 0.0);
    p.v01.assign(neg.size(), 0.0);
    for (std::size_t i = 0; i < pos.size(); ++i)
        for (std::size_t j = 0; j < neg.size(); ++j) {
            const double psi = mw_psi(scores[pos[i]], scores[neg[j]]);
            p.v10[i] += psi;
            p.v01[j] += psi;
        }
    for (double& v : p.v10) v /= static_cast<double>(neg.size());
    for (double& v : p.v01) v /= static_cast<double>(pos.size());
    for (const double v : p.v10) p.auc += v;
    p.auc /= static_cast<double>(pos.size());
    return p;
}

// Unbiased sample covariance; 0 when fewer than 2 observations.
inline double sample_cov(const std::vector<double>& x,
                         const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += (x[k] - mx) * (y[k] - my);
    return s / (n - 1);
}

} // namespace detail

// Paired DeLong test for the difference of two correlated AUCs measured on
// the same samples. Two-sided p-value against the standard normal.
inline delong_result delong_test(const score_table& a, const score_table& b) {
    validate(a);
    validate(b);
    if (a.size() != b.size())
        throw sample_mismatch("score tables have " + std::to_string(a.size()) +
                              " and " + std::to_string(b.size()) + " rows");
    if (!a.ids.empty() && !b.ids.empty() && a.ids != b.ids)
        throw sample_mismatch("score tables list different sample ids");
    if (a.labels != b.labels)
        throw sample_mismatch("score tables disagree on sample labels");

    std::vector<std::size_t> pos, neg;
    for (std::size_t k = 0; k < a.size(); ++k)
        (a.labels[k] == 1 ? pos : neg).push_back(k);
    if (pos.empty() || neg.empty())
        throw single_class("DeLong test needs both classes");
    const double m = static_cast<double>(pos.size());
    const double n = static_cast<double>(neg.size());

    const detail::placements pa = detail::placement_values(a.scores, pos, neg);
    const detail::placements pb = detail::placement_values(b.scores, pos, neg);

    const double s_aa = detail::sample_cov(pa.v10, pa.v10) / m +
                        detail::sample_cov(pa.v01, pa.v01) / n;
    const double s_bb = detail::sample_cov(pb.v10, pb.v10) / m +
                        detail::sample_cov(pb.v01, pb.v01) / n;
    const double s_ab = detail::sample_cov(pa.v10, pb.v10) / m +
                        detail::sample_cov(pa.v01, pb.v01) / n;

    delong_result r;
    r.auc_a = pa.auc;
    r.auc_b = pb.auc;
    r.variance_diff = std::max(0.0, s_aa + s_bb - 2.0 * s_ab);
    const double diff = pa.auc - pb.auc;
    if (r.variance_diff <= 1e-15) {
        // Degenerate variance: identical AUCs give the null verdict, a
        // genuine difference with zero estimated variance is reported as
        // certain rather than dividing by zero.
        if (diff == 0.0) {
            r.z_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.z_statistic = diff > 0.0
                                ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
        return r;
    }
    r.z_statistic = diff / std::sqrt(r.variance_diff);
    // 2 * (1 - Phi(|z|)) written via erfc for accuracy in the tail.
    r.p_value = std::erfc(std::abs(r.z_statistic) / std::numbers::sqrt2);
    return r;
}

} // namespace kshape
