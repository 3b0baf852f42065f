#include "telltale/patterns.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "telltale/error.hpp"

namespace telltale {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

void PatternConfig::validate() const {
    if (height < 2 || width < 2) {
        throw ParameterError("pattern dimensions must be at least 2x2, got " +
                             std::to_string(height) + "x" + std::to_string(width));
    }
    if (!std::isfinite(delta_phi) || !std::isfinite(xi_min) || !std::isfinite(xi_max)) {
        throw ParameterError("pattern parameters must be finite");
    }
    if (xi_min < 0.0 || xi_max < xi_min) {
        throw ParameterError("pattern frequencies must satisfy 0 <= xi_min <= xi_max");
    }
}

PolarField polar_coords(const PatternConfig& cfg) {
    cfg.validate();
    PolarField field;
    field.height = cfg.height;
    field.width = cfg.width;
    const std::size_t n = static_cast<std::size_t>(cfg.height) * static_cast<std::size_t>(cfg.width);
    field.x_norm.resize(n);
    field.y_norm.resize(n);
    field.rho.resize(n);
    field.phi.resize(n);
    // (2x - (w-1)) / (w-1) equals 2x/(w-1) - 1 but negates exactly under x -> w-1-x.
    const double dx = cfg.width - 1;
    const double dy = cfg.height - 1;
    for (int y = 0; y < cfg.height; ++y) {
        const double yn = (2.0 * y - dy) / dy;
        for (int x = 0; x < cfg.width; ++x) {
            const double xn = (2.0 * x - dx) / dx;
            const std::size_t i = field.index(y, x);
            field.x_norm[i] = xn;
            field.y_norm[i] = yn;
            field.rho[i] = std::hypot(xn, yn);
            field.phi[i] = std::atan2(yn, xn);
        }
    }
    return field;
}

Image make_semantic(const PatternConfig& cfg) {
    cfg.validate();
    return Image(cfg.height, cfg.width, 1, 0.0f);
}

Image make_photometric(const PatternConfig& cfg) {
    const PolarField field = polar_coords(cfg);
    Image out(cfg.height, cfg.width, 3);
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const std::size_t i = field.index(y, x);
            HlsPixel hls;
            hls.h = std::fmod((field.phi[i] + cfg.delta_phi) / kTwoPi, 1.0);
            if (hls.h < 0.0) hls.h += 1.0;
            hls.l = 1.0 - field.rho[i] / kSqrt2;
            hls.s = 1.0;
            const RgbPixel rgb = hls_to_rgb(hls);
            out.at(y, x, 0) = static_cast<float>(rgb.r);
            out.at(y, x, 1) = static_cast<float>(rgb.g);
            out.at(y, x, 2) = static_cast<float>(rgb.b);
        }
    }
    return out;
}

Image make_geometric(const PatternConfig& cfg) {
    const PolarField field = polar_coords(cfg);
    Image out(cfg.height, cfg.width, 1);
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const std::size_t i = field.index(y, x);
            const double xi = cfg.xi_min + (cfg.xi_max - cfg.xi_min) * field.rho[i] / kSqrt2;
            const double omega = kTwoPi * xi;
            const double psi = std::sin(omega * field.x_norm[i]) * std::sin(omega * field.y_norm[i]);
            out.at(y, x) = static_cast<float>(0.5 * (1.0 + psi));
        }
    }
    return out;
}

WatermarkBundle make_references(const PatternConfig& cfg) {
    return {make_semantic(cfg), make_photometric(cfg), make_geometric(cfg), Provenance::Reference};
}

}  // namespace telltale
