#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "kshape/errors.hpp"
#include "kshape/landmarks.hpp"
#include "kshape/matrix.hpp"

namespace kshape {

// How two shapes' landmark sequences are matched when measuring distance:
// `indexed` pairs landmark k with landmark k, `cyclic` additionally
// minimizes over the starting index of the second shape.
enum class shape_metric { indexed, cyclic };

// Centered, unit-norm complex landmark vector: one representative of a shape
// equivalence class. Rotation is never removed explicitly; every comparison
// below is rotation-invariant by construction.
struct pre_shape {
    std::vector<cpx> z;

    std::size_t size() const { return z.size(); }
};

// Project-wide inner product convention: conjugate the FIRST argument,
//   <a, b> = sum_k conj(a_k) * b_k.
inline cpx hermitian_inner(const pre_shape& a, const pre_shape& b) {
    if (a.size() != b.size())
        throw length_mismatch("pre-shape lengths differ: " +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    cpx s{0.0, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k)
        s += std::conj(a.z[k]) * b.z[k];
    return s;
}

inline pre_shape to_pre_shape(const landmark_set& lm) {
    validate(lm);
    const cpx m = centroid(lm);
    pre_shape out;
    out.z.reserve(lm.size());
    double sq = 0.0;
    for (const cpx& p : lm.points) {
        const cpx q = p - m;
        out.z.push_back(q);
        sq += std::norm(q);
    }
    const double nrm = std::sqrt(sq);
    if (nrm < 1e-12)
        throw degenerate_shape("all landmarks coincide (centered norm " +
                               std::to_string(nrm) + ")");
    for (cpx& q : out.z) q /= nrm;
    return out;
}

namespace detail {

// ||a - beta*b||^2 / ||a||^2 with beta = <b,a>/<b,b>, evaluating b at a
// cyclic index offset. Algebraically equal to 1 - |<a,b>|^2/(|a|^2 |b|^2),
// but the residual is summed from small terms, so values near zero come out
// at round-off scale instead of being swamped by cancellation in 1 - |.|^2.
inline double projection_residual(const pre_shape& a, const pre_shape& b,
                                  std::size_t shift) {
    const std::size_t n = a.size();
    double naa = 0.0, nbb = 0.0;
    double ip_re = 0.0, ip_im = 0.0; // <b, a> = sum conj(b_k) a_k
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t kb = k + shift;
        if (kb >= n) kb -= n;
        const cpx& x = a.z[k];
        const cpx& y = b.z[kb];
        naa += x.real() * x.real() + x.imag() * x.imag();
        nbb += y.real() * y.real() + y.imag() * y.imag();
        ip_re += y.real() * x.real() + y.imag() * x.imag();
        ip_im += y.real() * x.imag() - y.imag() * x.real();
    }
    const double br = ip_re / nbb;
    const double bi = ip_im / nbb;
    double resid = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t kb = k + shift;
        if (kb >= n) kb -= n;
        const cpx& x = a.z[k];
        const cpx& y = b.z[kb];
        const double rr = x.real() - (br * y.real() - bi * y.imag());
        const double ri = x.imag() - (br * y.imag() + bi * y.real());
        resid += rr * rr + ri * ri;
    }
    return resid / naa;
}

// Squared full Procrustes distance, clamped to [0, 1]. Computed in both
// argument orders and averaged so the result is exactly symmetric.
inline double fp_squared(const pre_shape& a, const pre_shape& b,
                         std::size_t shift_b = 0) {
    if (a.size() != b.size())
        throw length_mismatch("pre-shape lengths differ: " +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    const std::size_t n = a.size();
    const std::size_t shift_a = shift_b == 0 ? 0 : n - shift_b;
    const double r = 0.5 * (projection_residual(a, b, shift_b) +
                            projection_residual(b, a, shift_a));
    return std::clamp(r, 0.0, 1.0);
}

} // namespace detail

// Full Procrustes distance (1 - |<a,b>|^2)^(1/2), in [0, 1]. Invariant to
// rotation of either argument; landmark k of a is compared with landmark k
// of b (index correspondence is the caller's responsibility).
inline double fp_distance(const pre_shape& a, const pre_shape& b) {
    return std::sqrt(detail::fp_squared(a, b));
}

// Gaussian kernel on the full Procrustes distance,
//   K(a, b) = exp(-d_FP(a,b)^2 / (2 sigma^2)),
// in (0, 1] with K(a, a) = 1.
inline double fp_kernel(const pre_shape& a, const pre_shape& b, double sigma) {
    if (!(sigma > 0.0))
        throw invalid_sigma("sigma must be > 0, got " + std::to_string(sigma));
    return std::exp(-detail::fp_squared(a, b) / (2.0 * sigma * sigma));
}

// Pairwise kernel matrix. Upper triangle is computed once and mirrored, so
// G == G^T holds exactly and the diagonal is exactly 1.
inline dmatrix gram_matrix(std::span<const pre_shape> shapes, double sigma) {
    if (!(sigma > 0.0))
        throw invalid_sigma("sigma must be > 0, got " + std::to_string(sigma));
    if (shapes.empty()) throw error("gram_matrix needs at least one shape");
    const std::size_t n = shapes.size();
    dmatrix g(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g(i, i) = fp_kernel(shapes[i], shapes[i], sigma);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = fp_kernel(shapes[i], shapes[j], sigma);
            g(i, j) = k;
            g(j, i) = k;
        }
    }
    return g;
}

// Angle theta in (-pi, pi] minimizing ||a.z - e^{i theta} b.z||. With the
// conjugate-first convention above this is arg <b, a>.
inline double optimal_rotation(const pre_shape& a, const pre_shape& b) {
    const cpx ip = hermitian_inner(b, a);
    if (std::abs(ip) < 1e-12)
        throw undefined_rotation("inner product magnitude " +
                                 std::to_string(std::abs(ip)) +
                                 " leaves the rotation undefined");
    double theta = std::atan2(ip.imag(), ip.real());
    if (theta <= -std::numbers::pi) theta += 2.0 * std::numbers::pi;
    return theta;
}

} // namespace kshape
