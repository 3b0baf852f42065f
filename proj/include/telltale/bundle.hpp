#pragma once

#include <string_view>

#include "telltale/image.hpp"

namespace telltale {

enum class Provenance { Reference, GroundTruth, Extracted };

std::string_view provenance_name(Provenance p) noexcept;

// The (semantic, photometric, geometric) watermark triple.
struct WatermarkBundle {
    Image sem;  // 1 channel
    Image pho;  // 3 channels
    Image geo;  // 1 channel
    Provenance provenance = Provenance::Reference;

    int height() const noexcept { return sem.height(); }
    int width() const noexcept { return sem.width(); }

    // Throws DimensionError on channel counts other than (1,3,1) or mismatched extents.
    void validate() const;
};

}  // namespace telltale
