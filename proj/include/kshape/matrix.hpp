#pragma once

#include <cstddef>
#include <vector>

namespace kshape {

// Minimal dense row-major matrix of doubles.
struct dmatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    dmatrix() = default;
    dmatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) {
        return data[i * cols + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        return data[i * cols + j];
    }
};

} // namespace kshape
