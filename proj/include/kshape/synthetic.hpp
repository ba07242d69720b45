#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "kshape/contour.hpp"
#include "kshape/landmarks.hpp"
#include "kshape/loocv.hpp"
#include "kshape/rng.hpp"

namespace kshape {

// Two synthetic families with distinct boundary character:
//   benign    - ellipses (smooth, at most mild elongation),
//   malignant - lobed blobs r(phi) = R (1 + a cos(k phi + phi0)) whose
//               spiculated rim no similarity transform can smooth away.
// Every shape gets its own random similarity pose and multiplicative
// radial noise, so the classes differ in shape only.
struct synth_config {
    int n_benign = 60;
    int n_malignant = 60;
    int n_landmarks = 400; // dense enough to resample down later
    double noise = 0.02;   // radial noise SD, relative to local radius
    int lobes_min = 3;
    int lobes_max = 8;
    double lobe_amp_min = 0.10;
    double lobe_amp_max = 0.35;
    double ecc_min = 0.20;
    double ecc_max = 0.80;
    std::uint64_t seed = 1;
};

inline void validate(const synth_config& cfg) {
    if (cfg.n_benign < 0 || cfg.n_malignant < 0)
        throw error("negative sample count");
    if (cfg.n_landmarks < 3)
        throw too_few_landmarks("need at least 3 landmarks, got " +
                                std::to_string(cfg.n_landmarks));
    if (cfg.noise < 0.0) throw error("noise SD must be >= 0");
    if (cfg.lobes_min < 2 || cfg.lobes_max < cfg.lobes_min)
        throw error("lobe count range is invalid");
    if (!(cfg.lobe_amp_min >= 0.0 && cfg.lobe_amp_max >= cfg.lobe_amp_min))
        throw error("lobe amplitude range is invalid");
    if (!(cfg.ecc_min >= 0.0 && cfg.ecc_max < 1.0 &&
          cfg.ecc_max >= cfg.ecc_min))
        throw error("eccentricity range is invalid");
}

namespace detail {

// Number of vertices of the dense curve before arc-length resampling. Kept
// divisible by `symmetry` so a k-lobed curve is sampled with exact k-fold
// index symmetry.
inline int dense_vertex_count(int symmetry) {
    constexpr int base = 2048;
    return symmetry * ((base + symmetry - 1) / symmetry);
}

inline landmark_set posed_resample(const std::vector<cpx>& dense,
                                   const synth_config& cfg, rng& r) {
    const double scale = r.uniform(20.0, 60.0);
    const double angle = r.uniform(0.0, 2.0 * std::numbers::pi);
    const cpx offset{r.uniform(100.0, 400.0), r.uniform(100.0, 400.0)};
    const landmark_set posed =
        similarity_transform(landmark_set{dense}, scale, angle, offset);
    return resample_closed_polyline(posed.points, cfg.n_landmarks);
}

} // namespace detail

// One benign shape: noisy ellipse with axis ratio sqrt(1 - e^2).
inline landmark_set gen_benign(const synth_config& cfg, rng& r) {
    validate(cfg);
    const double ecc = r.uniform(cfg.ecc_min, cfg.ecc_max);
    const double axis = std::sqrt(1.0 - ecc * ecc);
    const int m = detail::dense_vertex_count(1);
    std::vector<cpx> dense;
    dense.reserve(m);
    for (int j = 0; j < m; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / m;
        const double bump = 1.0 + cfg.noise * r.normal();
        dense.emplace_back(bump * std::cos(phi), bump * axis * std::sin(phi));
    }
    return detail::posed_resample(dense, cfg, r);
}

// One malignant shape: k-lobed curve in polar form.
inline landmark_set gen_malignant(const synth_config& cfg, rng& r) {
    validate(cfg);
    const int k = r.int_in(cfg.lobes_min, cfg.lobes_max);
    const double amp = r.uniform(cfg.lobe_amp_min, cfg.lobe_amp_max);
    const double phase = r.uniform(0.0, 2.0 * std::numbers::pi);
    const int m = detail::dense_vertex_count(k);
    std::vector<cpx> dense;
    dense.reserve(m);
    for (int j = 0; j < m; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / m;
        const double rad = (1.0 + amp * std::cos(k * phi + phase)) *
                           (1.0 + cfg.noise * r.normal());
        dense.emplace_back(rad * std::cos(phi), rad * std::sin(phi));
    }
    return detail::posed_resample(dense, cfg, r);
}

// Benign block first, then malignant. Each shape draws from its own
// rng seeded by (cfg.seed, global index), so any one shape can be
// regenerated alone and inserting shapes never shifts later ones.
inline shape_dataset gen_dataset(const synth_config& cfg) {
    validate(cfg);
    shape_dataset ds;
    char buf[32];
    for (int i = 0; i < cfg.n_benign; ++i) {
        rng r(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        std::snprintf(buf, sizeof buf, "b%03d", i);
        ds.ids.emplace_back(buf);
        ds.labels.push_back(-1);
        ds.shapes.push_back(gen_benign(cfg, r));
    }
    for (int i = 0; i < cfg.n_malignant; ++i) {
        rng r(derive_seed(cfg.seed,
                          static_cast<std::uint64_t>(cfg.n_benign + i)));
        std::snprintf(buf, sizeof buf, "m%03d", i);
        ds.ids.emplace_back(buf);
        ds.labels.push_back(1);
        ds.shapes.push_back(gen_malignant(cfg, r));
    }
    return ds;
}

} // namespace kshape
