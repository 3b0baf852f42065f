/**
 * @file chain_io.hpp
 * @brief ChainSpec JSON schema.
 *
 *   {
 *     "semantic":    {"mask": "<path>" | {"shape": "rectangle"|"ellipse", "seed": n, "frac": f},
 *                     "fill": "<path>" | "surrogate"},
 *     "photometric": {"order": ["b","c","h","s"],
 *                     "params": {"b": 1.0, "c": 1.0, "h": 0.0, "s": 1.0}},
 *     "geometric":   {"order": ["ro","tr","sc","sh"],
 *                     "params": {"ro": 0.0, "tr_x": 0.0, "tr_y": 0.0, "sc": 1.0,
 *                                "sh_x": 0.0, "sh_y": 0.0}}
 *   }
 *
 * Reasoning settings:
 *
 *   {"max_iter": 100, "step": 0.1, "fd_step_geo": 1e-3, "fd_step_pho": 1e-3,
 *    "pyramid_levels": 3, "prune_iter": 50, "restarts": 1, "threads": 0, "mask_threshold": 0.5,
 *    "ranges": {"ro": [lo, hi], "tr": [...], "sc": [...], "sh": [...],
 *               "b": [...], "c": [...], "h": [...], "s": [...]}}
 *
 * Every block is optional. Angles (ro, sh_x, sh_y) are radians unless the
 * reader is told the document uses degrees. Missing params take identity
 * values; a missing order takes the canonical order.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "json.hpp"
#include "telltale/image.hpp"
#include "telltale/reasoner.hpp"
#include "telltale/transforms.hpp"

namespace telltale {

struct ChainContext {
    int height = 0;
    int width = 0;
    // Carrier used for "surrogate" fills; without it the fill is neutral grey.
    const Image* carrier = nullptr;
    std::uint64_t seed = 0;
    std::filesystem::path base_dir;  // relative mask/fill paths resolve here
    bool degrees = false;
};

// Throws FormatError on schema violations and ParameterError on invalid values.
ChainSpec chain_from_json(const nlohmann::json& doc, const ChainContext& ctx);
ChainSpec load_chain(const std::filesystem::path& path, ChainContext ctx);

nlohmann::json photometric_to_json(const PhotometricBlock& block);
nlohmann::json geometric_to_json(const GeometricBlock& block);
nlohmann::json mask_spec_to_json(const MaskSpec& spec);

// Serializes the photometric and geometric blocks; the semantic block is
// written from `semantic` when given (images themselves are not embedded).
nlohmann::json chain_to_json(const ChainSpec& chain, const std::optional<nlohmann::json>& semantic = std::nullopt);

// Parameter boxes from {"ro": [lo, hi], ...}; unspecified boxes keep the defaults.
ParameterRanges ranges_from_json(const nlohmann::json& doc, bool degrees = false);

ReasonConfig reason_config_from_json(const nlohmann::json& doc, bool degrees = false);
ReasonConfig load_reason_config(const std::filesystem::path& path, bool degrees = false);

// {"geometric": {"order": [...], "params": {...}, "loss": x},
//  "photometric": {...}, "semantic": {"binarized_mask": mask_path, "mask_fraction": f}}
nlohmann::json hypothesis_to_json(const ChainHypothesis& h, const std::string& mask_path);

}  // namespace telltale
