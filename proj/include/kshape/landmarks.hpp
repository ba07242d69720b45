#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "kshape/errors.hpp"

namespace kshape {

// One landmark is one complex number: real part = axial coordinate,
// imaginary part = lateral coordinate, in pixel units.
using cpx = std::complex<double>;

// Ordered closed polygon of n >= 3 landmarks. Point k is adjacent to
// point k+1 and point n-1 is adjacent to point 0.
struct landmark_set {
    std::vector<cpx> points;

    landmark_set() = default;
    explicit landmark_set(std::vector<cpx> p) : points(std::move(p)) {}

    std::size_t size() const { return points.size(); }
};

// Throws too_few_landmarks / error on broken invariants.
inline void validate(const landmark_set& lm) {
    if (lm.size() < 3)
        throw too_few_landmarks("landmark set needs at least 3 points, got " +
                                std::to_string(lm.size()));
    for (const cpx& p : lm.points)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw error("landmark coordinates must be finite");
}

inline cpx centroid(const landmark_set& lm) {
    cpx s{0.0, 0.0};
    for (const cpx& p : lm.points) s += p;
    return s / static_cast<double>(lm.size());
}

// Shoelace area in the (axial, lateral) plane; positive means the traversal
// order this library calls counterclockwise.
inline double signed_area(const landmark_set& lm) {
    double a = 0.0;
    const auto& p = lm.points;
    const std::size_t n = p.size();
    for (std::size_t k = 0; k < n; ++k) {
        const cpx& u = p[k];
        const cpx& v = p[(k + 1) % n];
        a += u.real() * v.imag() - v.real() * u.imag();
    }
    return 0.5 * a;
}

// out[k] = in[(k + shift) mod n]; landmark identity is preserved, only the
// starting index moves.
inline landmark_set cyclic_shift(const landmark_set& lm, std::size_t shift) {
    const std::size_t n = lm.size();
    std::vector<cpx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = lm.points[(k + shift) % n];
    return landmark_set{std::move(out)};
}

// p -> scale * e^{i angle} * p + offset, applied to every landmark.
inline landmark_set similarity_transform(const landmark_set& lm, double scale,
                                         double angle, cpx offset) {
    const cpx factor = scale * std::polar(1.0, angle);
    std::vector<cpx> out;
    out.reserve(lm.size());
    for (const cpx& p : lm.points) out.push_back(factor * p + offset);
    return landmark_set{std::move(out)};
}

} // namespace kshape
