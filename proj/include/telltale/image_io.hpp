#pragma once

#include <filesystem>

#include "telltale/image.hpp"

namespace telltale {

// TTWM: "TTWM", version 0x01, height/width/channels as u32 LE, then
// binary32 LE samples, row-major, channel-last. Round-trips bit-exactly.
inline constexpr unsigned char kTtwmVersion = 0x01;
inline constexpr std::size_t kTtwmHeaderBytes = 4 + 1 + 12;

void write_ttwm(const Image& img, const std::filesystem::path& path);
Image read_ttwm(const std::filesystem::path& path);

// 8-bit PNG. Writing quantizes x -> round(255 * clamp(x)) / 255; reading maps
// to [0,1]. Alpha is dropped; grey PNGs load as 1 channel, colour as 3.
void write_png(const Image& img, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

// Dispatch on extension: ".ttwm" or ".png".
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

}  // namespace telltale
