#include "telltale/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "telltale/error.hpp"
#include "telltale/image_io.hpp"
#include "telltale/random.hpp"
#include "json.hpp"

namespace telltale {

namespace {

using json = nlohmann::json;

constexpr float kNeutral = 0.5f;

// 2x2 box average of one channel of src into slot (oy, ox) of dst channel dc.
void write_slot(const Image& src, int sc, Image& dst, int dc, int oy, int ox) {
    const int hh = src.height() / 2;
    const int hw = src.width() / 2;
    for (int y = 0; y < hh; ++y) {
        for (int x = 0; x < hw; ++x) {
            const double avg = 0.25 * (static_cast<double>(src.at(2 * y, 2 * x, sc)) + src.at(2 * y, 2 * x + 1, sc) +
                                       src.at(2 * y + 1, 2 * x, sc) + src.at(2 * y + 1, 2 * x + 1, sc));
            dst.at(oy + y, ox + x, dc) = static_cast<float>(std::clamp(avg, 0.0, 1.0));
        }
    }
}

// Pixel-replicated upsampling of slot (oy, ox) of payload channel pc into dst channel dc.
void read_slot(const Image& payload, int pc, int oy, int ox, Image& dst, int dc, float weight, bool accumulate) {
    const int hh = payload.height() / 2;
    const int hw = payload.width() / 2;
    for (int y = 0; y < dst.height(); ++y) {
        const int sy = std::min(y / 2, hh - 1);
        for (int x = 0; x < dst.width(); ++x) {
            const int sx = std::min(x / 2, hw - 1);
            const float v = weight * payload.at(oy + sy, ox + sx, pc);
            float& out = dst.at(y, x, dc);
            out = accumulate ? out + v : v;
        }
    }
}

std::array<double, 7> blur_kernel() {
    std::array<double, 7> k{};
    double sum = 0.0;
    for (int i = -3; i <= 3; ++i) {
        k[static_cast<std::size_t>(i + 3)] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
        sum += k[static_cast<std::size_t>(i + 3)];
    }
    for (double& v : k) v /= sum;
    return k;
}

void require_payload_extent(const Image& img) {
    if (img.height() < 2 || img.width() < 2) {
        throw DimensionError("residual channel needs images of at least 2x2 pixels");
    }
}

}  // namespace

WatermarkBundle oracle_extract(const WatermarkBundle& refs, const ChainSpec& chain, const NoiseSpec& noise) {
    if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
        throw ParameterError("noise sigma must be finite and non-negative");
    }
    WatermarkBundle out = ground_truth_watermarks(refs, chain);
    out.provenance = Provenance::Extracted;
    if (noise.sigma == 0.0) return out;
    Rng rng(mix_seed(noise.seed, 0x6E6F697365));
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    for (Image* img : {&out.sem, &out.pho, &out.geo}) {
        for (float& v : img->values()) v = static_cast<float>(std::clamp(v + gauss(rng), 0.0, 1.0));
    }
    return out;
}

Image make_payload(const WatermarkBundle& refs) {
    refs.validate();
    require_payload_extent(refs.sem);
    const int h = refs.height();
    const int w = refs.width();
    const int hh = h / 2;
    const int hw = w / 2;
    Image payload(h, w, 3, kNeutral);
    write_slot(refs.sem, 0, payload, 0, 0, 0);
    write_slot(refs.geo, 0, payload, 0, 0, hw);
    for (int c = 0; c < 3; ++c) {
        write_slot(refs.pho, c, payload, c, hh, 0);
        write_slot(refs.pho, c, payload, c, hh, hw);
    }
    return payload;
}

WatermarkBundle decode_payload(const Image& payload) {
    require_channels(payload, 3, "payload");
    require_payload_extent(payload);
    const int h = payload.height();
    const int w = payload.width();
    const int hh = h / 2;
    const int hw = w / 2;
    WatermarkBundle out;
    out.provenance = Provenance::Extracted;
    out.sem = Image(h, w, 1);
    out.geo = Image(h, w, 1);
    out.pho = Image(h, w, 3);
    read_slot(payload, 0, 0, 0, out.sem, 0, 1.0f, false);
    read_slot(payload, 0, 0, hw, out.geo, 0, 1.0f, false);
    for (int c = 0; c < 3; ++c) {
        read_slot(payload, c, hh, 0, out.pho, c, 0.5f, false);
        read_slot(payload, c, hh, hw, out.pho, c, 0.5f, true);
    }
    out.sem.clamp_in_place();
    out.pho.clamp_in_place();
    out.geo.clamp_in_place();
    return out;
}

Image embed_residual(const Image& carrier, const WatermarkBundle& refs, double alpha) {
    require_channels(carrier, 3, "carrier");
    require_same_extent(carrier, refs.sem, "embed_residual");
    if (!std::isfinite(alpha) || alpha < 0.0) throw ParameterError("embedding amplitude must be >= 0");
    const Image payload = make_payload(refs);
    Image out(carrier.height(), carrier.width(), 3);
    const auto x = carrier.values();
    const auto p = payload.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
        dst[i] = static_cast<float>(std::clamp(x[i] + alpha * (p[i] - 0.5), 0.0, 1.0));
    }
    return out;
}

Image gaussian_blur(const Image& img) {
    static const auto k = blur_kernel();
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    std::vector<double> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int d = -3; d <= 3; ++d) {
                    acc += k[static_cast<std::size_t>(d + 3)] * img.at(y, std::clamp(x + d, 0, w - 1), ch);
                }
                tmp[(static_cast<std::size_t>(y) * w + x) * c + ch] = acc;
            }
        }
    }
    Image out(h, w, c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int d = -3; d <= 3; ++d) {
                    const int yy = std::clamp(y + d, 0, h - 1);
                    acc += k[static_cast<std::size_t>(d + 3)] * tmp[(static_cast<std::size_t>(yy) * w + x) * c + ch];
                }
                out.at(y, x, ch) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Image extract_payload(const Image& marked, double alpha, const std::optional<Image>& clean_carrier) {
    require_channels(marked, 3, "marked image");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("extraction amplitude must be > 0");
    Image estimate;
    if (clean_carrier) {
        if (!clean_carrier->same_shape(marked)) {
            throw DimensionError("clean carrier must match the marked image shape");
        }
        estimate = *clean_carrier;
    } else {
        estimate = gaussian_blur(marked);
    }
    Image payload(marked.height(), marked.width(), 3);
    const auto m = marked.values();
    const auto e = estimate.values();
    auto dst = payload.values();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double r = static_cast<double>(m[i]) - e[i];
        dst[i] = static_cast<float>(std::clamp(r / alpha + 0.5, 0.0, 1.0));
    }
    return payload;
}

WatermarkBundle extract_residual(const Image& marked, double alpha, const std::optional<Image>& clean_carrier) {
    return decode_payload(extract_payload(marked, alpha, clean_carrier));
}

std::filesystem::path save_bundle(const WatermarkBundle& bundle, const std::filesystem::path& dir,
                                  const std::string& source) {
    bundle.validate();
    std::filesystem::create_directories(dir);
    write_ttwm(bundle.sem, dir / "sem.ttwm");
    write_ttwm(bundle.pho, dir / "pho.ttwm");
    write_ttwm(bundle.geo, dir / "geo.ttwm");
    const json manifest = {{"sem", "sem.ttwm"},         {"pho", "pho.ttwm"},
                           {"geo", "geo.ttwm"},         {"height", bundle.height()},
                           {"width", bundle.width()},   {"source", source},
                           {"provenance", std::string(provenance_name(bundle.provenance))}};
    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << manifest.dump(2) << '\n';
    return path;
}

std::filesystem::path resolve_manifest(const std::filesystem::path& path) {
    if (std::filesystem::is_directory(path)) return path / "manifest.json";
    return path;
}

WatermarkBundle load_bundle(const std::filesystem::path& manifest_path) {
    const auto path = resolve_manifest(manifest_path);
    std::ifstream in(path);
    if (!in) throw Error("cannot open bundle manifest " + path.string());
    json manifest;
    try {
        manifest = json::parse(in);
        const auto dir = path.parent_path();
        WatermarkBundle b;
        b.sem = read_ttwm(dir / manifest.at("sem").get<std::string>());
        b.pho = read_ttwm(dir / manifest.at("pho").get<std::string>());
        b.geo = read_ttwm(dir / manifest.at("geo").get<std::string>());
        const std::string prov = manifest.value("provenance", std::string("extracted"));
        b.provenance = prov == "reference" ? Provenance::Reference
                       : prov == "ground_truth" ? Provenance::GroundTruth
                                                : Provenance::Extracted;
        b.validate();
        if (manifest.at("height").get<int>() != b.height() || manifest.at("width").get<int>() != b.width()) {
            throw FormatError(path.string() + ": manifest extent disagrees with payload files");
        }
        return b;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": invalid bundle manifest: " + e.what());
    } catch (const DimensionError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace telltale
