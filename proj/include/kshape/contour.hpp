#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "kshape/errors.hpp"
#include "kshape/landmarks.hpp"
#include "kshape/matrix.hpp"
#include "kshape/preshape.hpp"

namespace kshape {

// Row-major boolean pixel grid. Row index = axial coordinate, column index
// = lateral coordinate.
struct binary_mask {
    int width = 0;  // columns
    int height = 0; // rows
    std::vector<std::uint8_t> data;

    bool at(int row, int col) const {
        if (row < 0 || row >= height || col < 0 || col >= width) return false;
        return data[static_cast<std::size_t>(row) * width + col] != 0;
    }
};

struct pixel_coord {
    int axial = 0;   // row
    int lateral = 0; // column

    friend bool operator==(pixel_coord, pixel_coord) = default;
};

// Closed boundary loop; consecutive entries (and last-to-first) are
// 8-neighbors, traversal is counterclockwise in the (axial, lateral) plane.
struct boundary_contour {
    std::vector<pixel_coord> path;
};

namespace detail {

// 8-neighborhood in clockwise screen order starting West:
// W, NW, N, NE, E, SE, S, SW as (d_row, d_col).
inline constexpr int moore_dr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
inline constexpr int moore_dc[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

inline int moore_dir(pixel_coord from, pixel_coord to) {
    for (int d = 0; d < 8; ++d)
        if (from.axial + moore_dr[d] == to.axial &&
            from.lateral + moore_dc[d] == to.lateral)
            return d;
    return -1;
}

// Largest 4-connected foreground component as its own mask; ties go to the
// component discovered first in row-major order.
inline binary_mask largest_component(const binary_mask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::size_t> sizes;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(y, x) || label[static_cast<std::size_t>(y) * w + x] >= 0)
                continue;
            const int id = static_cast<int>(sizes.size());
            std::size_t count = 0;
            std::queue<pixel_coord> open;
            open.push({y, x});
            label[static_cast<std::size_t>(y) * w + x] = id;
            while (!open.empty()) {
                const pixel_coord p = open.front();
                open.pop();
                ++count;
                constexpr int dr[4] = {-1, 1, 0, 0};
                constexpr int dc[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int ny = p.axial + dr[k], nx = p.lateral + dc[k];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
                    if (mask.data[idx] != 0 && label[idx] < 0) {
                        label[idx] = id;
                        open.push({ny, nx});
                    }
                }
            }
            sizes.push_back(count);
        }
    }
    if (sizes.empty()) throw empty_mask("mask has no foreground pixel");
    const int keep = static_cast<int>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    binary_mask out{w, h, std::vector<std::uint8_t>(label.size(), 0)};
    for (std::size_t i = 0; i < label.size(); ++i)
        out.data[i] = label[i] == keep ? 1 : 0;
    return out;
}

inline double signed_area_pixels(const std::vector<pixel_coord>& path) {
    double a = 0.0;
    const std::size_t n = path.size();
    for (std::size_t k = 0; k < n; ++k) {
        const pixel_coord u = path[k];
        const pixel_coord v = path[(k + 1) % n];
        a += double(u.axial) * v.lateral - double(v.axial) * u.lateral;
    }
    return 0.5 * a;
}

} // namespace detail

// Outer boundary of the largest 4-connected foreground component, traced
// with Moore-neighbor tracing and Jacob's stopping criterion (terminate on
// re-entering the start pixel with the original backtrack). Holes are
// ignored. Throws empty_mask / degenerate_region.
inline boundary_contour trace_boundary(const binary_mask& mask) {
    if (mask.width <= 0 || mask.height <= 0 || mask.data.empty())
        throw empty_mask("mask is empty");
    const binary_mask comp = detail::largest_component(mask);

    pixel_coord start{-1, -1};
    for (int y = 0; y < comp.height && start.axial < 0; ++y)
        for (int x = 0; x < comp.width; ++x)
            if (comp.at(y, x)) {
                start = {y, x};
                break;
            }

    // West of the row-major first pixel is always background.
    const pixel_coord back0{start.axial, start.lateral - 1};
    std::vector<pixel_coord> path{start};
    pixel_coord p = start, back = back0;
    const long guard = 4L * comp.width * comp.height + 16;
    for (long iter = 0; iter < guard; ++iter) {
        const int from = detail::moore_dir(p, back);
        pixel_coord next{-1, -1}, next_back{-1, -1};
        for (int k = 1; k <= 8; ++k) {
            const int d = (from + k) % 8;
            const pixel_coord q{p.axial + detail::moore_dr[d],
                                p.lateral + detail::moore_dc[d]};
            if (comp.at(q.axial, q.lateral)) {
                const int prev = (from + k - 1) % 8;
                next = q;
                next_back = {p.axial + detail::moore_dr[prev],
                             p.lateral + detail::moore_dc[prev]};
                break;
            }
        }
        if (next.axial < 0) break; // isolated pixel, no neighbors
        if (next == start && next_back == back0) break;
        path.push_back(next);
        p = next;
        back = next_back;
    }

    std::vector<std::uint8_t> seen(comp.data.size(), 0);
    std::size_t distinct = 0;
    for (const pixel_coord q : path) {
        std::uint8_t& s = seen[static_cast<std::size_t>(q.axial) * comp.width +
                               q.lateral];
        if (!s) {
            s = 1;
            ++distinct;
        }
    }
    if (distinct < 3)
        throw degenerate_region("largest component has only " +
                                std::to_string(distinct) +
                                " boundary pixels");

    if (detail::signed_area_pixels(path) < 0.0)
        std::reverse(path.begin() + 1, path.end());
    return boundary_contour{std::move(path)};
}

// n points equally spaced in arc length along the closed polyline through
// `vertices`, linearly interpolated, first point at vertex 0.
inline landmark_set resample_closed_polyline(std::span<const cpx> vertices,
                                             int n) {
    if (n < 3)
        throw too_few_landmarks("need at least 3 landmarks, got " +
                                std::to_string(n));
    const std::size_t m = vertices.size();
    if (m < 2) throw degenerate_shape("polyline has fewer than 2 vertices");
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        cum[i + 1] = cum[i] + std::abs(vertices[(i + 1) % m] - vertices[i]);
    const double perimeter = cum[m];
    if (!(perimeter > 1e-12))
        throw degenerate_shape("contour perimeter is zero");

    std::vector<cpx> out;
    out.reserve(n);
    std::size_t seg = 0;
    for (int j = 0; j < n; ++j) {
        const double s = perimeter * j / n;
        while (seg + 1 < m + 1 && cum[seg + 1] <= s) ++seg;
        if (seg >= m) seg = m - 1; // guard against round-off at the end
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
        out.push_back(vertices[seg] +
                      t * (vertices[(seg + 1) % m] - vertices[seg]));
    }
    return landmark_set{std::move(out)};
}

inline landmark_set resample_equidistant(const boundary_contour& c, int n) {
    std::vector<cpx> verts;
    verts.reserve(c.path.size());
    for (const pixel_coord p : c.path)
        verts.emplace_back(double(p.axial), double(p.lateral));
    return resample_closed_polyline(verts, n);
}

inline landmark_set resample_landmarks(const landmark_set& lm, int n) {
    validate(lm);
    return resample_closed_polyline(lm.points, n);
}

// Canonical cyclic re-indexing: counterclockwise orientation, index 0 at the
// landmark farthest from the centroid, ties broken by smaller polar angle
// about the centroid. Idempotent, and invariant under cyclic shifts of the
// input.
inline landmark_set canonical_start(const landmark_set& lm) {
    validate(lm);
    landmark_set out = lm;
    if (signed_area(out) < 0.0)
        std::reverse(out.points.begin(), out.points.end());
    const cpx c = centroid(out);
    std::size_t best = 0;
    double best_d = -1.0, best_angle = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const cpx q = out.points[k] - c;
        const double d = std::norm(q);
        const double angle = std::atan2(q.imag(), q.real());
        if (d > best_d || (d == best_d && angle < best_angle)) {
            best = k;
            best_d = d;
            best_angle = angle;
        }
    }
    std::rotate(out.points.begin(), out.points.begin() + best,
                out.points.end());
    return out;
}

// min over cyclic landmark shifts s of fp_distance(a, shift(b, s)).
// Robust alternative when two canonical starts disagree; never larger than
// fp_distance on the same pair.
inline double fp_distance_cyclic(const pre_shape& a, const pre_shape& b) {
    if (a.size() != b.size())
        throw length_mismatch("pre-shape lengths differ: " +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    double best = 1.0;
    for (std::size_t s = 0; s < a.size(); ++s)
        best = std::min(best, detail::fp_squared(a, b, s));
    return std::sqrt(best);
}

inline double fp_kernel_cyclic(const pre_shape& a, const pre_shape& b,
                               double sigma) {
    if (!(sigma > 0.0))
        throw invalid_sigma("sigma must be > 0, got " + std::to_string(sigma));
    double best = 1.0;
    for (std::size_t s = 0; s < a.size(); ++s)
        best = std::min(best, detail::fp_squared(a, b, s));
    return std::exp(-best / (2.0 * sigma * sigma));
}

inline dmatrix gram_matrix_cyclic(std::span<const pre_shape> shapes,
                                  double sigma) {
    if (!(sigma > 0.0))
        throw invalid_sigma("sigma must be > 0, got " + std::to_string(sigma));
    if (shapes.empty()) throw error("gram_matrix needs at least one shape");
    const std::size_t n = shapes.size();
    dmatrix g(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g(i, i) = 1.0; // shift 0 of a shape against itself
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = fp_kernel_cyclic(shapes[i], shapes[j], sigma);
            g(i, j) = k;
            g(j, i) = k;
        }
    }
    return g;
}

} // namespace kshape
