/**
 * @file patterns.hpp
 * @brief Tell-tale reference watermarks: blank canvas, colour wheel and
 *        radially chirped wave interference.
 *
 * Normalized coordinates map column x to 2x/(width-1) - 1 and row y to
 * 2y/(height-1) - 1, so corner pixels land exactly on +-1 and odd-sized
 * grids have an exact centre pixel.
 */
#pragma once

#include <vector>

#include "telltale/bundle.hpp"
#include "telltale/image.hpp"

namespace telltale {

struct PatternConfig {
    int height = 128;
    int width = 128;
    double delta_phi = 0.0;  // hue rotation of the colour wheel, radians
    double xi_min = 2.0;     // cycles per normalized unit at the centre
    double xi_max = 10.0;    // cycles per normalized unit at the corners

    // Throws ParameterError when the invariants do not hold.
    void validate() const;
};

struct PolarField {
    int height = 0;
    int width = 0;
    std::vector<double> x_norm;
    std::vector<double> y_norm;
    std::vector<double> rho;  // in [0, sqrt(2)]
    std::vector<double> phi;  // in (-pi, pi]

    std::size_t index(int y, int x) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
};

PolarField polar_coords(const PatternConfig& cfg);

Image make_semantic(const PatternConfig& cfg);
Image make_photometric(const PatternConfig& cfg);
Image make_geometric(const PatternConfig& cfg);

// The three reference watermarks, provenance "reference".
WatermarkBundle make_references(const PatternConfig& cfg);

}  // namespace telltale
