/**
 * @file channel.hpp
 * @brief Extraction channels producing watermark bundles from a carrier and
 *        chain, plus the bundle manifest format shared with external codecs.
 *
 * The oracle channel returns the ground-truth watermarks plus clamped
 * Gaussian noise. The residual channel is a linear reference embedding:
 *
 *   x_w = clamp(x + alpha * (P - 0.5))
 *
 * where the payload plane P (H x W x 3) holds half-resolution (2x2 box
 * averaged) copies of the watermarks in quadrant slots:
 *
 *   channel 0:  NW = semantic,     NE = geometric
 *   channel 1:  NW, NE neutral (0.5)
 *   channel 2:  NW, NE neutral (0.5)
 *   channel k:  SW = SE = photometric channel k   (k = 0, 1, 2)
 *
 * Pixels outside the slot grid (odd extents) stay neutral. Decoding reads
 * each slot back, averages the duplicated photometric slots and upsamples
 * to full resolution by pixel replication.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "telltale/bundle.hpp"
#include "telltale/image.hpp"
#include "telltale/transforms.hpp"

namespace telltale {

struct NoiseSpec {
    double sigma = 0.0;  // standard deviation of additive Gaussian noise
    std::uint64_t seed = 0;
};

// Ground truth plus i.i.d. N(0, sigma^2) noise, clamped to [0,1].
WatermarkBundle oracle_extract(const WatermarkBundle& refs, const ChainSpec& chain, const NoiseSpec& noise);

inline constexpr double kDefaultEmbedAlpha = 0.04;

// Payload plane P for a bundle (values in [0,1]).
Image make_payload(const WatermarkBundle& refs);

// Inverse of make_payload's slot layout.
WatermarkBundle decode_payload(const Image& payload);

// x_w = clamp(x + alpha * (P - 0.5)). Throws DimensionError on mismatch.
Image embed_residual(const Image& carrier, const WatermarkBundle& refs, double alpha = kDefaultEmbedAlpha);

// Payload estimate from a marked image. With a clean carrier the residual is
// exact (informed mode); otherwise the carrier is estimated by a 7x7
// Gaussian blur with sigma 1.5 (blind mode). Result is clamped to [0,1].
Image extract_payload(const Image& marked, double alpha = kDefaultEmbedAlpha,
                      const std::optional<Image>& clean_carrier = std::nullopt);

WatermarkBundle extract_residual(const Image& marked, double alpha = kDefaultEmbedAlpha,
                                 const std::optional<Image>& clean_carrier = std::nullopt);

// Separable Gaussian blur, radius 3, sigma 1.5, clamp-to-edge.
Image gaussian_blur(const Image& img);

// Manifest: {"sem","pho","geo": TTWM file names relative to the manifest,
// "height", "width", "source"}. save_bundle writes sem.ttwm, pho.ttwm,
// geo.ttwm and manifest.json into dir and returns the manifest path.
std::filesystem::path save_bundle(const WatermarkBundle& bundle, const std::filesystem::path& dir,
                                  const std::string& source = "telltale");
WatermarkBundle load_bundle(const std::filesystem::path& manifest_path);

// Accepts a manifest file or a directory containing manifest.json.
std::filesystem::path resolve_manifest(const std::filesystem::path& path);

}  // namespace telltale
