#include "telltale/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "telltale/error.hpp"
#include "telltale/random.hpp"

namespace telltale {

namespace {

inline float clamp01f(double v) noexcept { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

void validate_factor(PhoOp kind, double value) {
    if (!std::isfinite(value)) throw ParameterError("photometric parameter must be finite");
    if (kind != PhoOp::Hue && value < 0.0) {
        throw ParameterError("photometric factor '" + std::string(op_name(kind)) +
                             "' must be non-negative, got " + std::to_string(value));
    }
}

double pixel_luma(const float* p, int channels) noexcept {
    if (channels == 1) return std::clamp(static_cast<double>(p[0]), 0.0, 1.0);
    return std::clamp(luma(p[0], p[1], p[2]), 0.0, 1.0);
}

// HSV hue rotation by `shift` cycles without leaving RGB: value and chroma
// are kept, so the three outputs are max, min and one ramp between them.
// Matches hsv_to_rgb(rgb_to_hsv(px) + shift) up to rounding.
inline void shift_hue(float* px, double shift) noexcept {
    const double r = std::clamp(static_cast<double>(px[0]), 0.0, 1.0);
    const double g = std::clamp(static_cast<double>(px[1]), 0.0, 1.0);
    const double b = std::clamp(static_cast<double>(px[2]), 0.0, 1.0);
    const double hi = std::max(r, std::max(g, b));
    const double lo = std::min(r, std::min(g, b));
    if (hi == lo) {
        px[0] = px[1] = px[2] = static_cast<float>(hi);
        return;
    }
    const double span = hi - lo;
    double h6;  // hue in sextants
    if (r == hi) {
        h6 = (g - b) / span;
    } else if (g == hi) {
        h6 = 2.0 + (b - r) / span;
    } else {
        h6 = 4.0 + (r - g) / span;
    }
    h6 += 6.0 * shift;
    if (h6 < 0.0) h6 += 6.0;
    if (h6 >= 6.0) h6 -= 6.0;
    const int sector = std::min(static_cast<int>(h6), 5);
    const double f = h6 - sector;
    const auto rise = static_cast<float>(lo + span * f);
    const auto fall = static_cast<float>(hi - span * f);
    const auto top = static_cast<float>(hi);
    const auto bottom = static_cast<float>(lo);
    switch (sector) {
        case 0: px[0] = top; px[1] = rise; px[2] = bottom; break;
        case 1: px[0] = fall; px[1] = top; px[2] = bottom; break;
        case 2: px[0] = bottom; px[1] = top; px[2] = rise; break;
        case 3: px[0] = bottom; px[1] = fall; px[2] = top; break;
        case 4: px[0] = rise; px[1] = bottom; px[2] = top; break;
        default: px[0] = top; px[1] = bottom; px[2] = fall; break;
    }
}

double mean_luma(const Image& img) noexcept {
    const int c = img.channels();
    const float* p = img.data();
    const std::size_t n = img.pixel_count();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += pixel_luma(p + i * static_cast<std::size_t>(c), c);
    return sum / static_cast<double>(n);
}

}  // namespace

std::string_view provenance_name(Provenance p) noexcept {
    switch (p) {
        case Provenance::Reference: return "reference";
        case Provenance::GroundTruth: return "ground_truth";
        case Provenance::Extracted: return "extracted";
    }
    return "unknown";
}

void WatermarkBundle::validate() const {
    require_channels(sem, 1, "semantic watermark");
    require_channels(pho, 3, "photometric watermark");
    require_channels(geo, 1, "geometric watermark");
    require_same_extent(sem, pho, "watermark bundle");
    require_same_extent(sem, geo, "watermark bundle");
}

// ============================================================================
// Geometric
// ============================================================================

Image apply_geometric(const Image& img, const GeoOrder& order, const GeoParams& params) {
    params.validate();
    Image out = img;
    for (GeoOp op : order) {
        const AffineMatrix m =
            recenter(inverse_affine(op, params, img.width(), img.height()), img.width(), img.height());
        if (m.is_identity()) continue;
        out = warp_bilinear(out, m);
    }
    return out;
}

// ============================================================================
// Photometric
// ============================================================================

void adjust_in_place(Image& img, PhoOp kind, double value) {
    validate_factor(kind, value);
    const int c = img.channels();
    const std::size_t n = img.pixel_count();
    float* p = img.data();
    switch (kind) {
        case PhoOp::Brightness:
            for (float& x : img.values()) x = clamp01f(value * x);
            break;
        case PhoOp::Contrast: {
            const double anchor = (1.0 - value) * mean_luma(img);
            for (float& x : img.values()) x = clamp01f(value * x + anchor);
            break;
        }
        case PhoOp::Hue: {
            const double shift = value - std::floor(value);
            if (c != 3 || shift == 0.0) {
                img.clamp_in_place();
                break;
            }
            for (std::size_t i = 0; i < n; ++i) shift_hue(p + 3 * i, shift);
            break;
        }
        case PhoOp::Saturation:
            for (std::size_t i = 0; i < n; ++i) {
                float* px = p + i * static_cast<std::size_t>(c);
                const double grey = (1.0 - value) * pixel_luma(px, c);
                for (int k = 0; k < c; ++k) px[k] = clamp01f(value * px[k] + grey);
            }
            break;
    }
}

Image adjust(const Image& img, PhoOp kind, double value) {
    Image out = img;
    adjust_in_place(out, kind, value);
    return out;
}

Image apply_photometric(const Image& img, const PhoOrder& order, const PhoParams& params) {
    params.validate();
    const auto values = params.to_array();
    Image out = img;
    for (PhoOp op : order) adjust_in_place(out, op, values[pho_param_slot(op)]);
    return out;
}

// ============================================================================
// Semantic
// ============================================================================

Image binarize(const Image& mask, double threshold) {
    Image out(mask.height(), mask.width(), mask.channels());
    const auto in = mask.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < in.size(); ++i) dst[i] = in[i] >= threshold ? 1.0f : 0.0f;
    return out;
}

bool is_binary(const Image& mask) noexcept {
    return std::all_of(mask.values().begin(), mask.values().end(),
                       [](float v) { return v == 0.0f || v == 1.0f; });
}

Image apply_semantic(const Image& img, const SemanticEdit& edit) {
    require_channels(edit.mask, 1, "semantic mask");
    require_same_extent(img, edit.mask, "semantic edit mask");
    if (!edit.fill.same_shape(img)) {
        throw DimensionError("semantic edit fill must match the carrier shape");
    }
    if (!is_binary(edit.mask)) throw ParameterError("semantic edit mask must be binary");
    Image out(img.height(), img.width(), img.channels());
    const int c = img.channels();
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const float m = edit.mask.data()[i];
        for (int k = 0; k < c; ++k) {
            const std::size_t j = i * static_cast<std::size_t>(c) + static_cast<std::size_t>(k);
            out.data()[j] = (1.0f - m) * img.data()[j] + m * edit.fill.data()[j];
        }
    }
    return out;
}

Image random_mask(int height, int width, std::uint64_t seed) {
    MaskSpec spec;
    spec.seed = seed;
    return random_mask(height, width, spec);
}

Image random_mask(int height, int width, const MaskSpec& spec) {
    Image mask(height, width, 1, 0.0f);
    Rng rng(mix_seed(spec.seed, 0x6D61736B));
    const MaskShape shape = spec.shape.value_or(uniform(rng, 0.0, 1.0) < 0.5 ? MaskShape::Rectangle
                                                                            : MaskShape::Ellipse);
    const double frac = spec.frac.value_or(uniform(rng, 0.05, 0.30));
    if (!(frac > 0.0 && frac <= 1.0)) throw ParameterError("mask area fraction must lie in (0, 1]");
    const double aspect = std::exp(uniform(rng, std::log(0.5), std::log(2.0)));
    const double area = frac * static_cast<double>(height) * static_cast<double>(width);

    if (shape == MaskShape::Rectangle) {
        double rw = std::min<double>(width, std::sqrt(area * aspect));
        double rh = std::min<double>(height, area / rw);
        rw = std::min<double>(width, area / rh);
        const int iw = std::clamp(static_cast<int>(std::lround(rw)), 1, width);
        const int ih = std::clamp(static_cast<int>(std::lround(rh)), 1, height);
        const int x0 = static_cast<int>(std::floor(uniform(rng, 0.0, width - iw + 1.0 - 1e-9)));
        const int y0 = static_cast<int>(std::floor(uniform(rng, 0.0, height - ih + 1.0 - 1e-9)));
        for (int y = y0; y < y0 + ih; ++y) {
            for (int x = x0; x < x0 + iw; ++x) mask.at(y, x) = 1.0f;
        }
    } else {
        const double pi = std::numbers::pi;
        double a = std::min(0.5 * width, std::sqrt(area * aspect / pi));
        double b = std::min(0.5 * height, area / (pi * a));
        a = std::min(0.5 * width, area / (pi * b));
        const double cx = uniform(rng, a - 0.5, width - 0.5 - a);
        const double cy = uniform(rng, b - 0.5, height - 0.5 - b);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double dx = (x - cx) / a;
                const double dy = (y - cy) / b;
                if (dx * dx + dy * dy <= 1.0) mask.at(y, x) = 1.0f;
            }
        }
    }
    return mask;
}

Image surrogate_fill(const Image& img, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x66696C6C));
    const ParameterRanges ranges;

    std::array<PhoOp, 4> pho_order = {PhoOp::Brightness, PhoOp::Contrast, PhoOp::Hue, PhoOp::Saturation};
    std::shuffle(pho_order.begin(), pho_order.end(), rng);
    PhoParams pho;
    pho.b = uniform(rng, ranges.b.lo, ranges.b.hi);
    pho.c = uniform(rng, ranges.c.lo, ranges.c.hi);
    pho.h = uniform(rng, ranges.h.lo, ranges.h.hi);
    pho.s = uniform(rng, ranges.s.lo, ranges.s.hi);

    std::array<GeoOp, 4> geo_order = {GeoOp::Rotate, GeoOp::Translate, GeoOp::Scale, GeoOp::Shear};
    std::shuffle(geo_order.begin(), geo_order.end(), rng);
    GeoParams geo;
    geo.ro = uniform(rng, ranges.ro.lo, ranges.ro.hi);
    geo.tr_x = uniform(rng, ranges.tr.lo, ranges.tr.hi);
    geo.tr_y = uniform(rng, ranges.tr.lo, ranges.tr.hi);
    geo.sc = uniform(rng, ranges.sc.lo, ranges.sc.hi);
    geo.sh_x = uniform(rng, ranges.sh.lo, ranges.sh.hi);
    geo.sh_y = uniform(rng, ranges.sh.lo, ranges.sh.hi);

    return apply_geometric(apply_photometric(img, PhoOrder(pho_order), pho), GeoOrder(geo_order), geo);
}

// ============================================================================
// Chains
// ============================================================================

Image apply_chain(const Image& img, const ChainSpec& chain) {
    Image out = img;
    if (chain.semantic) out = apply_semantic(out, *chain.semantic);
    if (chain.photometric) out = apply_photometric(out, chain.photometric->order, chain.photometric->params);
    if (chain.geometric) out = apply_geometric(out, chain.geometric->order, chain.geometric->params);
    return out;
}

WatermarkBundle ground_truth_watermarks(const WatermarkBundle& refs, const ChainSpec& chain) {
    refs.validate();
    WatermarkBundle out;
    out.provenance = Provenance::GroundTruth;
    if (chain.semantic) {
        // Edited pixels are flagged with 1 on the blank canvas, which reduces to m.
        const Image& m = chain.semantic->mask;
        require_same_extent(refs.sem, m, "semantic edit mask");
        out.sem = apply_semantic(refs.sem, SemanticEdit{m, Image(m.height(), m.width(), 1, 1.0f)});
    } else {
        out.sem = refs.sem;
    }
    out.pho = refs.pho;
    if (chain.photometric) {
        out.pho = apply_photometric(out.pho, chain.photometric->order, chain.photometric->params);
    }
    out.geo = refs.geo;
    if (chain.geometric) {
        const auto& g = *chain.geometric;
        out.sem = apply_geometric(out.sem, g.order, g.params);
        out.pho = apply_geometric(out.pho, g.order, g.params);
        out.geo = apply_geometric(out.geo, g.order, g.params);
    }
    return out;
}

}  // namespace telltale
