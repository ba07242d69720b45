#pragma once

#include <stdexcept>
#include <string>

namespace kshape {

// Base class for every failure the library reports. Each named condition
// gets its own type so callers can catch exactly what they can handle.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All landmarks coincide; no pre-shape exists (centered norm below 1e-12).
struct degenerate_shape : error {
    using error::error;
};

// Two shape vectors of different length were combined.
struct length_mismatch : error {
    using error::error;
};

// Kernel width sigma must be strictly positive.
struct invalid_sigma : error {
    using error::error;
};

// Optimal rotation is undefined when the inner product vanishes.
struct undefined_rotation : error {
    using error::error;
};

// Mask contains no foreground pixel.
struct empty_mask : error {
    using error::error;
};

// Largest foreground component has fewer than 3 boundary pixels.
struct degenerate_region : error {
    using error::error;
};

// Fewer than 3 landmarks requested or provided.
struct too_few_landmarks : error {
    using error::error;
};

// A training set (or fold) contains only one class.
struct single_class : error {
    using error::error;
};

// The dual solver exhausted its iteration budget with KKT violations left.
struct not_converged : error {
    using error::error;
};

// Two score tables do not describe the same samples.
struct sample_mismatch : error {
    using error::error;
};

// Malformed or unreadable input file.
struct io_error : error {
    using error::error;
};

} // namespace kshape
