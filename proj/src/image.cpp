#include "telltale/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "telltale/error.hpp"

namespace telltale {

namespace {

void validate_shape(int height, int width, int channels) {
    if (height <= 0 || width <= 0) {
        throw DimensionError("image dimensions must be positive, got " + std::to_string(height) +
                             "x" + std::to_string(width));
    }
    if (channels != 1 && channels != 3) {
        throw DimensionError("image channel count must be 1 or 3, got " +
                             std::to_string(channels));
    }
}

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

double wrap_unit(double h) noexcept {
    h -= std::floor(h);
    return h >= 1.0 ? 0.0 : h;
}

// Piecewise hue ramp used by the HLS inverse.
double hls_channel(double m1, double m2, double hue) noexcept {
    hue = wrap_unit(hue);
    if (hue < 1.0 / 6.0) return m1 + (m2 - m1) * hue * 6.0;
    if (hue < 0.5) return m2;
    if (hue < 2.0 / 3.0) return m1 + (m2 - m1) * (2.0 / 3.0 - hue) * 6.0;
    return m1;
}

// Hue of an RGB triple given its max/min, as a fraction of a cycle.
double hue_of(double r, double g, double b, double maxc, double minc) noexcept {
    const double span = maxc - minc;
    const double rc = (maxc - r) / span;
    const double gc = (maxc - g) / span;
    const double bc = (maxc - b) / span;
    double h;
    if (r == maxc) {
        h = bc - gc;
    } else if (g == maxc) {
        h = 2.0 + rc - bc;
    } else {
        h = 4.0 + gc - rc;
    }
    return wrap_unit(h / 6.0);
}

}  // namespace

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
    validate_shape(height, width, channels);
    data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                     static_cast<std::size_t>(channels),
                 fill);
}

Image::Image(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    validate_shape(height, width, channels);
    const std::size_t expected = static_cast<std::size_t>(height) *
                                 static_cast<std::size_t>(width) *
                                 static_cast<std::size_t>(channels);
    if (data_.size() != expected) {
        throw DimensionError("image data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(expected));
    }
}

Image Image::clamped() const {
    Image out = *this;
    out.clamp_in_place();
    return out;
}

void Image::clamp_in_place() noexcept {
    for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

Image Image::channel(int c) const {
    Image out(height_, width_, 1);
    const std::size_t n = pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        out.data_[i] = data_[i * static_cast<std::size_t>(channels_) + static_cast<std::size_t>(c)];
    }
    return out;
}

bool bitwise_equal(const Image& a, const Image& b) noexcept {
    if (!a.same_shape(b)) return false;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (std::bit_cast<std::uint32_t>(av[i]) != std::bit_cast<std::uint32_t>(bv[i])) return false;
    }
    return true;
}

void require_same_extent(const Image& a, const Image& b, const char* what) {
    if (!a.same_extent(b)) {
        throw DimensionError(std::string(what) + ": image extents differ (" +
                             std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                             " vs " + std::to_string(b.height()) + "x" +
                             std::to_string(b.width()) + ")");
    }
}

void require_channels(const Image& img, int channels, const char* what) {
    if (img.channels() != channels) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(channels) +
                             "-channel image, got " + std::to_string(img.channels()));
    }
}

// ============================================================================
// Colour spaces
// ============================================================================

HlsPixel rgb_to_hls(RgbPixel p) noexcept {
    const double r = clamp01(p.r);
    const double g = clamp01(p.g);
    const double b = clamp01(p.b);
    const double maxc = std::max({r, g, b});
    const double minc = std::min({r, g, b});
    const double l = 0.5 * (maxc + minc);
    if (maxc == minc) return {0.0, l, 0.0};
    const double span = maxc - minc;
    const double s = l <= 0.5 ? span / (maxc + minc) : span / (2.0 - maxc - minc);
    return {hue_of(r, g, b, maxc, minc), l, s};
}

RgbPixel hls_to_rgb(HlsPixel p) noexcept {
    const double h = wrap_unit(p.h);
    const double l = clamp01(p.l);
    const double s = clamp01(p.s);
    if (s == 0.0) return {l, l, l};
    const double m2 = l <= 0.5 ? l * (1.0 + s) : l + s - l * s;
    const double m1 = 2.0 * l - m2;
    return {hls_channel(m1, m2, h + 1.0 / 3.0), hls_channel(m1, m2, h),
            hls_channel(m1, m2, h - 1.0 / 3.0)};
}

HsvPixel rgb_to_hsv(RgbPixel p) noexcept {
    const double r = clamp01(p.r);
    const double g = clamp01(p.g);
    const double b = clamp01(p.b);
    const double maxc = std::max({r, g, b});
    const double minc = std::min({r, g, b});
    if (maxc == minc) return {0.0, 0.0, maxc};
    return {hue_of(r, g, b, maxc, minc), (maxc - minc) / maxc, maxc};
}

RgbPixel hsv_to_rgb(HsvPixel p) noexcept {
    const double h = wrap_unit(p.h);
    const double s = clamp01(p.s);
    const double v = clamp01(p.v);
    if (s == 0.0) return {v, v, v};
    const double scaled = h * 6.0;
    const int sector = std::min(static_cast<int>(scaled), 5);
    const double f = scaled - sector;
    const double pp = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (sector) {
        case 0: return {v, t, pp};
        case 1: return {q, v, pp};
        case 2: return {pp, v, t};
        case 3: return {pp, q, v};
        case 4: return {t, pp, v};
        default: return {v, pp, q};
    }
}

Image luminance(const Image& rgb) {
    require_channels(rgb, 3, "luminance");
    Image out(rgb.height(), rgb.width(), 1);
    const float* src = rgb.data();
    float* dst = out.data();
    const std::size_t n = rgb.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double y = luma(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
        dst[i] = static_cast<float>(clamp01(y));
    }
    return out;
}

Image replicate(const Image& gray, int channels) {
    require_channels(gray, 1, "replicate");
    Image out(gray.height(), gray.width(), channels);
    const std::size_t n = gray.pixel_count();
    const auto c = static_cast<std::size_t>(channels);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < c; ++k) out.data()[i * c + k] = gray.data()[i];
    }
    return out;
}

}  // namespace telltale
