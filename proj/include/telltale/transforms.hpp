/**
 * @file transforms.hpp
 * @brief Parameterized semantic, photometric and geometric transformations,
 *        fixed-order chains and ground-truth watermark propagation.
 */
#pragma once

#include <cstdint>
#include <optional>

#include "telltale/affine.hpp"
#include "telltale/bundle.hpp"
#include "telltale/image.hpp"
#include "telltale/params.hpp"

namespace telltale {

// ============================================================================
// Geometric
// ============================================================================

// Sequential recentred warps in the given order. Each step resamples and
// zero-fills independently; identity steps are skipped (bitwise no-ops).
Image apply_geometric(const Image& img, const GeoOrder& order, const GeoParams& params);

// ============================================================================
// Photometric
// ============================================================================

// One photometric adjustment, clamped to [0,1]:
//   brightness  v * img
//   contrast    v * img + (1 - v) * mean(luminance(img))
//   hue         HSV hue shifted by v (fraction of a cycle), per pixel
//   saturation  v * img + (1 - v) * luminance(img)
// 1-channel images are their own luminance and have no hue.
// Throws ParameterError for negative brightness/contrast/saturation factors.
Image adjust(const Image& img, PhoOp kind, double value);

// In-place variant used by the reasoning loops.
void adjust_in_place(Image& img, PhoOp kind, double value);

Image apply_photometric(const Image& img, const PhoOrder& order, const PhoParams& params);

// ============================================================================
// Semantic
// ============================================================================

struct SemanticEdit {
    Image mask;  // 1 channel, values in {0,1}
    Image fill;  // same extent and channel count as the carrier
};

// Threshold a grey mask at 0.5 into {0,1}.
Image binarize(const Image& mask, double threshold = 0.5);
bool is_binary(const Image& mask) noexcept;

// (1 - m) * img + m * fill. Throws DimensionError on shape mismatch and
// ParameterError if the mask is not binary.
Image apply_semantic(const Image& img, const SemanticEdit& edit);

enum class MaskShape { Rectangle, Ellipse };

struct MaskSpec {
    std::optional<MaskShape> shape;  // drawn from the seed when absent
    std::uint64_t seed = 0;
    std::optional<double> frac;      // area fraction; uniform in [0.05, 0.30] when absent
};

// One axis-aligned rectangle or ellipse covering the requested fraction of
// the area (5%-30% uniform by default). Binary.
Image random_mask(int height, int width, std::uint64_t seed);
Image random_mask(int height, int width, const MaskSpec& spec);

// Random photometric + geometric variant of img (random orders, parameters
// uniform in the default boxes), used as surrogate inpainting content.
Image surrogate_fill(const Image& img, std::uint64_t seed);

// ============================================================================
// Chains
// ============================================================================

struct PhotometricBlock {
    PhoOrder order;
    PhoParams params;
};

struct GeometricBlock {
    GeoOrder order;
    GeoParams params;
};

// Fixed class order: semantic, then photometric, then geometric.
struct ChainSpec {
    std::optional<SemanticEdit> semantic;
    std::optional<PhotometricBlock> photometric;
    std::optional<GeometricBlock> geometric;
};

Image apply_chain(const Image& img, const ChainSpec& chain);

// Reference watermarks pushed through the chain:
//   sem <- f_geo(m)           (zeros when there is no semantic edit)
//   pho <- f_geo(f_pho(w_pho))
//   geo <- f_geo(w_geo)
WatermarkBundle ground_truth_watermarks(const WatermarkBundle& refs, const ChainSpec& chain);

}  // namespace telltale
