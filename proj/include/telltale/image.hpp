/**
 * @file image.hpp
 * @brief Image carrier type and colour-space conversions.
 *
 * An Image is an H x W x C array of binary32 intensities, row-major and
 * channel-last. It carries photographs, watermarks and masks alike. Values
 * are nominally in [0,1]; intermediate buffers may leave that range.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace telltale {

class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, float fill = 0.0f);
    Image(int height, int width, int channels, std::vector<float> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
    float at(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }
    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }
    bool same_extent(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    // Copy with every value clamped to [0,1].
    Image clamped() const;
    void clamp_in_place() noexcept;

    // Single channel c as a 1-channel image.
    Image channel(int c) const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int y, int x, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// Bitwise equality (distinguishes -0 from +0 and compares NaN payloads).
bool bitwise_equal(const Image& a, const Image& b) noexcept;

// Throws DimensionError unless both images share height and width.
void require_same_extent(const Image& a, const Image& b, const char* what);
void require_channels(const Image& img, int channels, const char* what);

// ============================================================================
// Colour spaces. Hue is a fraction of a full cycle in [0,1).
// ============================================================================

struct RgbPixel {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

struct HlsPixel {
    double h = 0.0;
    double l = 0.0;
    double s = 0.0;
};

struct HsvPixel {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

HlsPixel rgb_to_hls(RgbPixel p) noexcept;
RgbPixel hls_to_rgb(HlsPixel p) noexcept;
HsvPixel rgb_to_hsv(RgbPixel p) noexcept;
RgbPixel hsv_to_rgb(HsvPixel p) noexcept;

// BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luma(double r, double g, double b) noexcept {
    return kLumaR * r + kLumaG * g + kLumaB * b;
}

// Weighted grey conversion of a 3-channel image; output clamped to [0,1].
Image luminance(const Image& rgb);

// Repeat a 1-channel image across `channels` channels.
Image replicate(const Image& gray, int channels);

}  // namespace telltale
