#include "telltale/chain_io.hpp"

#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "telltale/error.hpp"
#include "telltale/image_io.hpp"

namespace telltale {

namespace {

using json = nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

double number_or(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw FormatError(std::string("chain parameter '") + key + "' must be a number");
    return v.get<double>();
}

std::vector<std::string> order_names(const json& block, const char* what) {
    if (!block.contains("order")) return {};
    const json& order = block.at("order");
    if (!order.is_array()) throw FormatError(std::string(what) + " order must be an array of names");
    std::vector<std::string> names;
    for (const json& n : order) {
        if (!n.is_string()) throw FormatError(std::string(what) + " order entries must be strings");
        names.push_back(n.get<std::string>());
    }
    return names;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

Image load_mask(const json& spec, const ChainContext& ctx) {
    if (spec.is_string()) {
        Image img = load_image(resolve(ctx.base_dir, spec.get<std::string>()));
        if (img.channels() == 3) img = luminance(img);
        if (img.height() != ctx.height || img.width() != ctx.width) {
            throw DimensionError("semantic mask extent does not match the carrier");
        }
        return binarize(img);
    }
    if (!spec.is_object()) throw FormatError("semantic mask must be a path or a {shape, seed, frac} object");
    MaskSpec ms;
    ms.seed = spec.contains("seed") ? spec.at("seed").get<std::uint64_t>() : ctx.seed;
    if (spec.contains("shape")) {
        const auto shape = spec.at("shape").get<std::string>();
        if (shape == "rectangle" || shape == "rect") {
            ms.shape = MaskShape::Rectangle;
        } else if (shape == "ellipse") {
            ms.shape = MaskShape::Ellipse;
        } else {
            throw FormatError("unknown mask shape '" + shape + "'");
        }
    }
    if (spec.contains("frac")) ms.frac = spec.at("frac").get<double>();
    return random_mask(ctx.height, ctx.width, ms);
}

Image load_fill(const json& spec, const ChainContext& ctx) {
    if (!spec.is_string()) throw FormatError("semantic fill must be a path or \"surrogate\"");
    const auto value = spec.get<std::string>();
    if (value == "surrogate") {
        if (ctx.carrier != nullptr) return surrogate_fill(*ctx.carrier, ctx.seed);
        return Image(ctx.height, ctx.width, 3, 0.5f);
    }
    Image fill = load_image(resolve(ctx.base_dir, value));
    if (ctx.carrier != nullptr && fill.channels() != ctx.carrier->channels()) {
        fill = fill.channels() == 1 ? replicate(fill, ctx.carrier->channels()) : luminance(fill);
    }
    if (fill.height() != ctx.height || fill.width() != ctx.width) {
        throw DimensionError("semantic fill extent does not match the carrier");
    }
    return fill;
}

Range range_from_json(const json& v, double unit) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw FormatError("parameter ranges must be [lo, hi] number pairs");
    }
    return {v[0].get<double>() * unit, v[1].get<double>() * unit};
}

json read_json(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error(std::string("cannot open ") + what + " " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace

ChainSpec chain_from_json(const json& doc, const ChainContext& ctx) {
    if (!doc.is_object()) throw FormatError("chain document must be a JSON object");
    if (ctx.height <= 0 || ctx.width <= 0) throw DimensionError("chain context needs a positive extent");
    const double angle_unit = ctx.degrees ? kDegToRad : 1.0;
    ChainSpec chain;
    try {
        if (doc.contains("semantic") && !doc.at("semantic").is_null()) {
            const json& s = doc.at("semantic");
            SemanticEdit edit;
            edit.mask = load_mask(s.at("mask"), ctx);
            edit.fill = load_fill(s.value("fill", json("surrogate")), ctx);
            chain.semantic = std::move(edit);
        }
        if (doc.contains("photometric") && !doc.at("photometric").is_null()) {
            const json& p = doc.at("photometric");
            PhotometricBlock block;
            const auto names = order_names(p, "photometric");
            if (!names.empty()) block.order = PhoOrder::from_names(names);
            const json params = p.value("params", json::object());
            block.params.b = number_or(params, "b", 1.0);
            block.params.c = number_or(params, "c", 1.0);
            block.params.h = number_or(params, "h", 0.0);
            block.params.s = number_or(params, "s", 1.0);
            block.params.validate();
            chain.photometric = block;
        }
        if (doc.contains("geometric") && !doc.at("geometric").is_null()) {
            const json& g = doc.at("geometric");
            GeometricBlock block;
            const auto names = order_names(g, "geometric");
            if (!names.empty()) block.order = GeoOrder::from_names(names);
            const json params = g.value("params", json::object());
            block.params.ro = number_or(params, "ro", 0.0) * angle_unit;
            block.params.tr_x = number_or(params, "tr_x", 0.0);
            block.params.tr_y = number_or(params, "tr_y", 0.0);
            block.params.sc = number_or(params, "sc", 1.0);
            block.params.sh_x = number_or(params, "sh_x", 0.0) * angle_unit;
            block.params.sh_y = number_or(params, "sh_y", 0.0) * angle_unit;
            block.params.validate();
            chain.geometric = block;
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid chain document: ") + e.what());
    }
    return chain;
}

ChainSpec load_chain(const std::filesystem::path& path, ChainContext ctx) {
    const json doc = read_json(path, "chain file");
    if (ctx.base_dir.empty()) ctx.base_dir = path.parent_path();
    return chain_from_json(doc, ctx);
}

json photometric_to_json(const PhotometricBlock& block) {
    return {{"order", block.order.names()},
            {"params", {{"b", block.params.b}, {"c", block.params.c}, {"h", block.params.h}, {"s", block.params.s}}}};
}

json geometric_to_json(const GeometricBlock& block) {
    const auto& p = block.params;
    return {{"order", block.order.names()},
            {"params",
             {{"ro", p.ro}, {"tr_x", p.tr_x}, {"tr_y", p.tr_y}, {"sc", p.sc}, {"sh_x", p.sh_x}, {"sh_y", p.sh_y}}}};
}

json mask_spec_to_json(const MaskSpec& spec) {
    json j = {{"seed", spec.seed}};
    if (spec.shape) j["shape"] = *spec.shape == MaskShape::Rectangle ? "rectangle" : "ellipse";
    if (spec.frac) j["frac"] = *spec.frac;
    return j;
}

json chain_to_json(const ChainSpec& chain, const std::optional<json>& semantic) {
    json doc = json::object();
    if (semantic) doc["semantic"] = *semantic;
    if (chain.photometric) doc["photometric"] = photometric_to_json(*chain.photometric);
    if (chain.geometric) doc["geometric"] = geometric_to_json(*chain.geometric);
    return doc;
}

ParameterRanges ranges_from_json(const json& doc, bool degrees) {
    if (!doc.is_object()) throw FormatError("ranges must be a JSON object");
    const double angle = degrees ? kDegToRad : 1.0;
    ParameterRanges r;
    const std::pair<const char*, Range*> slots[] = {{"ro", &r.ro}, {"tr", &r.tr}, {"sc", &r.sc}, {"sh", &r.sh},
                                                    {"b", &r.b},   {"c", &r.c},   {"h", &r.h},   {"s", &r.s}};
    for (const auto& [key, range] : slots) {
        if (!doc.contains(key)) continue;
        const bool is_angle = std::string_view(key) == "ro" || std::string_view(key) == "sh";
        *range = range_from_json(doc.at(key), is_angle ? angle : 1.0);
    }
    r.validate();
    return r;
}

ReasonConfig reason_config_from_json(const json& doc, bool degrees) {
    if (!doc.is_object()) throw FormatError("reasoning config must be a JSON object");
    ReasonConfig cfg;
    try {
        cfg.max_iter = doc.value("max_iter", cfg.max_iter);
        cfg.step = doc.value("step", cfg.step);
        cfg.fd_step_geo = doc.value("fd_step_geo", cfg.fd_step_geo);
        cfg.fd_step_pho = doc.value("fd_step_pho", cfg.fd_step_pho);
        cfg.pyramid_levels = doc.value("pyramid_levels", cfg.pyramid_levels);
        cfg.prune_iter = doc.value("prune_iter", cfg.prune_iter);
        cfg.restarts = doc.value("restarts", cfg.restarts);
        cfg.threads = doc.value("threads", cfg.threads);
        cfg.mask_threshold = doc.value("mask_threshold", cfg.mask_threshold);
        if (doc.contains("ranges")) cfg.ranges = ranges_from_json(doc.at("ranges"), degrees);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid reasoning config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ReasonConfig load_reason_config(const std::filesystem::path& path, bool degrees) {
    return reason_config_from_json(read_json(path, "reasoning config"), degrees);
}

json hypothesis_to_json(const ChainHypothesis& h, const std::string& mask_path) {
    json geo = geometric_to_json({h.geometric.order, h.geometric.params});
    geo["loss"] = h.geometric.loss;
    json pho = photometric_to_json({h.photometric.order, h.photometric.params});
    pho["loss"] = h.photometric.loss;
    double area = 0.0;
    for (float v : h.binarized_mask.values()) area += v;
    const double fraction = h.binarized_mask.size() == 0 ? 0.0 : area / static_cast<double>(h.binarized_mask.size());
    return {{"geometric", geo},
            {"photometric", pho},
            {"semantic", {{"binarized_mask", mask_path}, {"mask_fraction", fraction}}}};
}

}  // namespace telltale
