#include "telltale/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "telltale/affine.hpp"
#include "telltale/chain_io.hpp"
#include "telltale/channel.hpp"
#include "telltale/error.hpp"
#include "telltale/metrics.hpp"
#include "telltale/parallel.hpp"
#include "telltale/patterns.hpp"

namespace telltale {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Report slot of each geometric/photometric parameter.
constexpr std::size_t kPhoOffset = GeoParams::kSize;

std::array<double, kReportParams> flatten(const GeoParams& g, const PhoParams& p) noexcept {
    return {g.ro, g.tr_x, g.tr_y, g.sc, g.sh_x, g.sh_y, p.b, p.c, p.h, p.s};
}

template <typename Op>
std::string order_text(const Permutation<Op>& order) {
    std::string out;
    for (Op op : order) {
        if (!out.empty()) out += ' ';
        out += op_name(op);
    }
    return out;
}

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

template <typename Op>
Permutation<Op> random_order(Rng& rng) {
    const auto all = Permutation<Op>::all();
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    return all[pick(rng)];
}

FamilySpec custom_family(const json& doc) {
    FamilySpec f;
    f.name = "custom";
    if (doc.contains("geometric")) {
        for (const auto& n : doc.at("geometric")) f.geometric.push_back(parse_geo_op(n.get<std::string>()));
    }
    if (doc.contains("photometric")) {
        for (const auto& n : doc.at("photometric")) f.photometric.push_back(parse_pho_op(n.get<std::string>()));
    }
    f.semantic = doc.value("semantic", true);
    return f;
}

ParamStats stats(const std::vector<double>& values) {
    ParamStats s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return s;
}

json stats_json(const ParamStats& s) { return {{"mean", s.mean}, {"std", s.stddev}, {"n", s.count}}; }

}  // namespace

const std::vector<FamilySpec>& named_families() {
    using G = GeoOp;
    using P = PhoOp;
    static const std::vector<FamilySpec> families = {
        {"Syn&B", {}, {P::Brightness}, true},
        {"Syn&C", {}, {P::Contrast}, true},
        {"Syn&H", {}, {P::Hue}, true},
        {"Syn&S", {}, {P::Saturation}, true},
        {"Syn&Ro", {G::Rotate}, {}, true},
        {"Syn&Tr", {G::Translate}, {}, true},
        {"Syn&Sc", {G::Scale}, {}, true},
        {"Syn&Sh", {G::Shear}, {}, true},
        {"Syn&B&Ro", {G::Rotate}, {P::Brightness}, true},
        {"Syn&C&Tr", {G::Translate}, {P::Contrast}, true},
        {"Syn&H&Sc", {G::Scale}, {P::Hue}, true},
        {"Syn&S&Sh", {G::Shear}, {P::Saturation}, true},
    };
    return families;
}

FamilySpec family_by_name(std::string_view name) {
    for (const auto& f : named_families()) {
        if (f.name == name) return f;
    }
    throw ParameterError("unknown chain family '" + std::string(name) + "'");
}

std::string_view channel_name(ChannelMode mode) noexcept {
    return mode == ChannelMode::Oracle ? "oracle" : "residual";
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ParameterError("trials must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be finite and >= 0");
    if (height < 11 || width < 11) throw ParameterError("experiment images must be at least 11x11");
    ranges.validate();
    reason.validate();
}

ExperimentConfig experiment_config_from_json(const json& doc, bool degrees) {
    if (!doc.is_object()) throw FormatError("experiment config must be a JSON object");
    ExperimentConfig cfg;
    try {
        const std::string family = doc.value("family", std::string("Syn&Ro"));
        if (family == "custom") {
            if (!doc.contains("custom")) throw FormatError("family \"custom\" needs a \"custom\" block");
            cfg.family = custom_family(doc.at("custom"));
        } else {
            cfg.family = family_by_name(family);
        }
        cfg.trials = doc.value("trials", cfg.trials);
        cfg.sigma = doc.value("sigma", cfg.sigma);
        const std::string channel = doc.value("channel", std::string("oracle"));
        if (channel == "oracle") {
            cfg.channel = ChannelMode::Oracle;
        } else if (channel == "residual") {
            cfg.channel = ChannelMode::Residual;
        } else {
            throw FormatError("unknown channel '" + channel + "'");
        }
        if (doc.contains("size")) cfg.height = cfg.width = doc.at("size").get<int>();
        cfg.height = doc.value("height", cfg.height);
        cfg.width = doc.value("width", cfg.width);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.threads = doc.value("threads", cfg.threads);
        if (doc.contains("ranges")) cfg.ranges = ranges_from_json(doc.at("ranges"), degrees);
        if (doc.contains("reason")) cfg.reason = reason_config_from_json(doc.at("reason"), degrees);
        cfg.reason.ranges = cfg.ranges;
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, bool degrees) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open experiment config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return experiment_config_from_json(doc, degrees);
}

SampledChain sample_chain(const FamilySpec& family, const ParameterRanges& ranges, std::uint64_t seed, int height,
                          int width, const Image* carrier) {
    Rng rng(seed);
    SampledChain out;
    if (family.semantic) {
        out.mask.seed = mix_seed(seed, 1);
        SemanticEdit edit;
        edit.mask = random_mask(height, width, out.mask);
        edit.fill = carrier != nullptr ? surrogate_fill(*carrier, mix_seed(seed, 2)) : Image(height, width, 3, 0.5f);
        out.chain.semantic = std::move(edit);
    }
    if (!family.photometric.empty()) {
        PhotometricBlock block;
        block.order = random_order<PhoOp>(rng);
        for (PhoOp op : family.photometric) {
            switch (op) {
                case PhoOp::Brightness: block.params.b = uniform(rng, ranges.b.lo, ranges.b.hi); break;
                case PhoOp::Contrast: block.params.c = uniform(rng, ranges.c.lo, ranges.c.hi); break;
                case PhoOp::Hue: block.params.h = uniform(rng, ranges.h.lo, ranges.h.hi); break;
                case PhoOp::Saturation: block.params.s = uniform(rng, ranges.s.lo, ranges.s.hi); break;
            }
        }
        out.chain.photometric = block;
    }
    if (!family.geometric.empty()) {
        GeometricBlock block;
        block.order = random_order<GeoOp>(rng);
        for (GeoOp op : family.geometric) {
            switch (op) {
                case GeoOp::Rotate: block.params.ro = uniform(rng, ranges.ro.lo, ranges.ro.hi); break;
                case GeoOp::Translate:
                    block.params.tr_x = uniform(rng, ranges.tr.lo, ranges.tr.hi);
                    block.params.tr_y = uniform(rng, ranges.tr.lo, ranges.tr.hi);
                    break;
                case GeoOp::Scale: block.params.sc = uniform(rng, ranges.sc.lo, ranges.sc.hi); break;
                case GeoOp::Shear:
                    block.params.sh_x = uniform(rng, ranges.sh.lo, ranges.sh.hi);
                    block.params.sh_y = uniform(rng, ranges.sh.lo, ranges.sh.hi);
                    break;
            }
        }
        out.chain.geometric = block;
    }
    return out;
}

Image synthetic_carrier(int height, int width, std::uint64_t seed) {
    Rng rng(seed);
    Image out(height, width, 3);
    for (int c = 0; c < 3; ++c) {
        struct Wave {
            double fx, fy, phase, amp;
        };
        std::array<Wave, 3> waves{};
        for (auto& w : waves) {
            w = {uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0), uniform(rng, 0.0, kTwoPi), uniform(rng, 0.3, 1.0)};
        }
        double total = 0.0;
        for (const auto& w : waves) total += w.amp;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double u = static_cast<double>(x) / width;
                const double v = static_cast<double>(y) / height;
                double acc = 0.0;
                for (const auto& w : waves) acc += w.amp * std::cos(kTwoPi * (w.fx * u + w.fy * v) + w.phase);
                out.at(y, x, c) = static_cast<float>(0.5 + 0.35 * acc / total);
            }
        }
    }
    return out;
}

double report_error(std::size_t index, double truth, double estimate) noexcept {
    const double d = std::abs(estimate - truth);
    switch (index) {
        case 0:  // ro
        case 4:  // sh_x
        case 5:  // sh_y
            return d / kTwoPi;
        case kPhoOffset + 2: {  // hue, circular distance in cycles
            const double f = d - std::floor(d);
            return std::min(f, 1.0 - f);
        }
        default:
            return d;
    }
}

std::vector<std::string_view> ExperimentReport::active_params() const {
    std::vector<std::string_view> names;
    for (GeoOp op : config.family.geometric) {
        for (std::size_t slot : geo_param_slots(op)) names.push_back(kReportParamNames[slot]);
    }
    for (PhoOp op : config.family.photometric) names.push_back(kReportParamNames[kPhoOffset + pho_param_slot(op)]);
    return names;
}

double ExperimentReport::mean_error(std::initializer_list<std::string_view> params) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& row : rows) {
        if (!row.ok) continue;
        for (std::string_view p : params) {
            const auto it = std::find(kReportParamNames.begin(), kReportParamNames.end(), p);
            if (it == kReportParamNames.end()) throw ParameterError("unknown report parameter '" + std::string(p) + "'");
            sum += row.error[static_cast<std::size_t>(it - kReportParamNames.begin())];
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

TrialRow run_trial(const ExperimentConfig& cfg, const WatermarkBundle& refs, int index, unsigned reason_threads) {
    const auto start = Clock::now();
    TrialRow row;
    row.trial = index;
    row.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(index));
    try {
        std::optional<Image> carrier;
        if (cfg.channel == ChannelMode::Residual) carrier = synthetic_carrier(cfg.height, cfg.width, mix_seed(row.seed, 4));
        const SampledChain sampled = sample_chain(cfg.family, cfg.ranges, mix_seed(row.seed, 1), cfg.height, cfg.width,
                                                  carrier ? &*carrier : nullptr);
        const ChainSpec& chain = sampled.chain;

        WatermarkBundle observed;
        if (cfg.channel == ChannelMode::Oracle) {
            observed = oracle_extract(refs, chain, {cfg.sigma, mix_seed(row.seed, 2)});
        } else {
            const Image marked = embed_residual(*carrier, refs);
            observed = extract_residual(apply_chain(marked, chain));
        }

        ReasonConfig rc = cfg.reason;
        rc.seed = mix_seed(row.seed, 5);
        rc.threads = reason_threads;
        const ChainHypothesis hyp = reason_chain(observed, refs, rc);

        const GeometricBlock geo_true = chain.geometric.value_or(GeometricBlock{});
        const PhotometricBlock pho_true = chain.photometric.value_or(PhotometricBlock{});
        row.truth = flatten(geo_true.params, pho_true.params);
        row.estimate = flatten(hyp.geometric.params, hyp.photometric.params);
        for (std::size_t i = 0; i < kReportParams; ++i) row.error[i] = report_error(i, row.truth[i], row.estimate[i]);
        row.true_geo_order = chain.geometric ? order_text(geo_true.order) : "";
        row.true_pho_order = chain.photometric ? order_text(pho_true.order) : "";
        row.est_geo_order = order_text(hyp.geometric.order);
        row.est_pho_order = order_text(hyp.photometric.order);
        row.geo_loss = hyp.geometric.loss;
        row.pho_loss = hyp.photometric.loss;
        row.geo_residual = l1(render_geo(refs.geo, hyp.geometric.order, hyp.geometric.params), observed.geo);
        row.pho_residual = l1(render_pho(refs.pho, hyp.photometric.order, hyp.photometric.params, hyp.geometric),
                              observed.pho);

        // True edited region: the mask carried through the composed geometric
        // block with nearest sampling, so it stays binary.
        Image true_region(cfg.height, cfg.width, 1, 0.0f);
        if (chain.semantic) {
            true_region = chain.semantic->mask;
            if (chain.geometric) {
                true_region = warp_nearest(true_region, compose_geometric(geo_true.order, geo_true.params,
                                                                          cfg.width, cfg.height));
            }
        }
        double area = 0.0;
        for (float v : true_region.values()) area += v;
        row.mask_fraction = area / static_cast<double>(true_region.size());
        row.iou = iou(true_region, hyp.binarized_mask);
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.message = e.what();
    }
    row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return row;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    ExperimentReport report;
    report.config = cfg;
    PatternConfig pc;
    pc.height = cfg.height;
    pc.width = cfg.width;
    const WatermarkBundle refs = make_references(pc);

    const unsigned workers = resolve_threads(cfg.threads);
    const bool trial_parallel = workers > 1 && cfg.trials > 1;
    const unsigned trial_threads = trial_parallel ? workers : 1;
    const unsigned reason_threads = trial_parallel ? 1 : workers;

    report.rows.resize(static_cast<std::size_t>(cfg.trials));
    parallel_for(report.rows.size(), trial_threads, [&](std::size_t i) {
        report.rows[i] = run_trial(cfg, refs, static_cast<int>(i), reason_threads);
    });
    aggregate(report);
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return report;
}

void aggregate(ExperimentReport& report) {
    std::array<std::vector<double>, kReportParams> errs;
    std::vector<double> ious;
    std::vector<double> geo;
    std::vector<double> pho;
    report.failures = 0;
    for (const auto& row : report.rows) {
        if (!row.ok) {
            ++report.failures;
            continue;
        }
        for (std::size_t i = 0; i < kReportParams; ++i) errs[i].push_back(row.error[i]);
        ious.push_back(row.iou);
        geo.push_back(row.geo_residual);
        pho.push_back(row.pho_residual);
    }
    for (std::size_t i = 0; i < kReportParams; ++i) report.errors[i] = stats(errs[i]);
    report.iou = stats(ious);
    report.geo_residual = stats(geo);
    report.pho_residual = stats(pho);
}

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "trial,seed,family,status,message";
    for (const char* prefix : {"true_", "est_", "err_"}) {
        for (std::string_view p : kReportParamNames) out << ',' << prefix << p;
    }
    out << ",true_geo_order,est_geo_order,true_pho_order,est_pho_order,geo_loss,pho_loss,geo_residual,pho_residual,"
           "mask_fraction,iou\n";
    for (const auto& row : report.rows) {
        out << row.trial << ',' << row.seed << ',' << csv_field(report.config.family.name) << ','
            << (row.ok ? "ok" : "error") << ',' << csv_field(row.message);
        for (const auto* values : {&row.truth, &row.estimate, &row.error}) {
            for (double v : *values) out << ',' << number(v);
        }
        out << ',' << row.true_geo_order << ',' << row.est_geo_order << ',' << row.true_pho_order << ','
            << row.est_pho_order << ',' << number(row.geo_loss) << ',' << number(row.pho_loss) << ','
            << number(row.geo_residual) << ',' << number(row.pho_residual) << ',' << number(row.mask_fraction) << ','
            << number(row.iou) << '\n';
    }
    return out.str();
}

json report_aggregate_json(const ExperimentReport& report) {
    const auto& cfg = report.config;
    json errors = json::object();
    for (std::size_t i = 0; i < kReportParams; ++i) errors[std::string(kReportParamNames[i])] = stats_json(report.errors[i]);
    json active = json::array();
    for (auto p : report.active_params()) active.push_back(std::string(p));
    double trial_seconds = 0.0;
    for (const auto& row : report.rows) trial_seconds += row.seconds;
    return {{"family", cfg.family.name},
            {"trials", cfg.trials},
            {"failures", report.failures},
            {"sigma", cfg.sigma},
            {"channel", std::string(channel_name(cfg.channel))},
            {"height", cfg.height},
            {"width", cfg.width},
            {"seed", cfg.seed},
            {"max_iter", cfg.reason.max_iter},
            {"active_params", active},
            {"errors", errors},
            {"iou", stats_json(report.iou)},
            {"geo_residual", stats_json(report.geo_residual)},
            {"pho_residual", stats_json(report.pho_residual)},
            {"wall_seconds", report.wall_seconds},
            {"trial_seconds_mean", report.rows.empty() ? 0.0 : trial_seconds / static_cast<double>(report.rows.size())}};
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "report.csv", std::ios::binary);
        if (!csv) throw Error("cannot write " + (dir / "report.csv").string());
        csv << report_csv(report);
    }
    std::ofstream agg(dir / "aggregate.json");
    if (!agg) throw Error("cannot write " + (dir / "aggregate.json").string());
    agg << report_aggregate_json(report).dump(2) << '\n';
}

}  // namespace telltale
