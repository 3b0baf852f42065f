#include "telltale/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "telltale/chain_io.hpp"
#include "telltale/channel.hpp"
#include "telltale/error.hpp"
#include "telltale/harness.hpp"
#include "telltale/image_io.hpp"
#include "telltale/metrics.hpp"
#include "telltale/patterns.hpp"
#include "telltale/random.hpp"
#include "telltale/reasoner.hpp"

namespace telltale {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Global {
    std::uint64_t seed = kDefaultSeed;
    bool verbose = false;
    bool degrees = false;
};

void log(const Global& g, const std::string& msg) {
    if (g.verbose) std::cerr << "[telltale] " << msg << '\n';
}

void write_json(const json& doc, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

struct CreateArgs {
    fs::path out_dir;
    int size = 128;
    int height = 0;
    int width = 0;
    double delta_phi = 0.0;
    double xi_min = 2.0;
    double xi_max = 10.0;
    bool png = false;
};

void run_create(const Global& g, const CreateArgs& a) {
    PatternConfig pc;
    pc.height = a.height > 0 ? a.height : a.size;
    pc.width = a.width > 0 ? a.width : a.size;
    pc.delta_phi = a.delta_phi;
    pc.xi_min = a.xi_min;
    pc.xi_max = a.xi_max;
    pc.validate();
    const WatermarkBundle refs = make_references(pc);
    const auto manifest = save_bundle(refs, a.out_dir, "create-watermarks");
    if (a.png) {
        write_png(refs.sem, a.out_dir / "sem.png");
        write_png(refs.pho, a.out_dir / "pho.png");
        write_png(refs.geo, a.out_dir / "geo.png");
    }
    log(g, "wrote " + manifest.string());
}

// ---------------------------------------------------------------------------

struct TransformArgs {
    fs::path input;
    fs::path chain;
    fs::path output;
    fs::path refs;
    fs::path out_dir;
};

void run_transform(const Global& g, const TransformArgs& a) {
    if (a.input.empty() == a.refs.empty()) {
        throw CLI::ValidationError("transform", "give exactly one of --input or --refs");
    }
    if (!a.input.empty()) {
        if (a.output.empty()) throw CLI::RequiredError("--output");
        const Image img = load_image(a.input);
        ChainContext ctx{img.height(), img.width(), &img, g.seed, {}, g.degrees};
        const ChainSpec chain = load_chain(a.chain, ctx);
        save_image(apply_chain(img, chain), a.output);
        log(g, "wrote " + a.output.string());
        return;
    }
    if (a.out_dir.empty()) throw CLI::RequiredError("--out-dir");
    const WatermarkBundle refs = load_bundle(a.refs);
    ChainContext ctx{refs.height(), refs.width(), nullptr, g.seed, {}, g.degrees};
    const ChainSpec chain = load_chain(a.chain, ctx);
    const auto manifest = save_bundle(ground_truth_watermarks(refs, chain), a.out_dir, "transform");
    log(g, "wrote " + manifest.string());
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
    fs::path input;
    fs::path refs;
    fs::path output;
    double alpha = kDefaultEmbedAlpha;
};

void run_embed(const Global& g, const EmbedArgs& a) {
    Image carrier = load_image(a.input);
    if (carrier.channels() == 1) carrier = replicate(carrier, 3);
    const WatermarkBundle refs = load_bundle(a.refs);
    save_image(embed_residual(carrier, refs, a.alpha), a.output);
    log(g, "wrote " + a.output.string());
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
    std::string mode;
    fs::path out_dir;
    fs::path refs;
    fs::path chain;
    double sigma = 0.0;
    fs::path input;
    fs::path clean;
    double alpha = kDefaultEmbedAlpha;
    fs::path bundle;
};

void run_extract(const Global& g, const ExtractArgs& a) {
    WatermarkBundle out;
    if (a.mode == "oracle") {
        if (a.refs.empty()) throw CLI::RequiredError("--refs");
        if (a.chain.empty()) throw CLI::RequiredError("--chain");
        const WatermarkBundle refs = load_bundle(a.refs);
        ChainContext ctx{refs.height(), refs.width(), nullptr, g.seed, {}, g.degrees};
        const ChainSpec chain = load_chain(a.chain, ctx);
        out = oracle_extract(refs, chain, {a.sigma, mix_seed(g.seed, 2)});
    } else if (a.mode == "residual") {
        if (a.input.empty()) throw CLI::RequiredError("--input");
        Image marked = load_image(a.input);
        if (marked.channels() == 1) marked = replicate(marked, 3);
        std::optional<Image> clean;
        if (!a.clean.empty()) {
            clean = load_image(a.clean);
            if (clean->channels() == 1) clean = replicate(*clean, 3);
        }
        out = extract_residual(marked, a.alpha, clean);
    } else {
        if (a.bundle.empty()) throw CLI::RequiredError("--bundle");
        out = load_bundle(a.bundle);
        out.provenance = Provenance::Extracted;
    }
    const auto manifest = save_bundle(out, a.out_dir, "extract:" + a.mode);
    log(g, "wrote " + manifest.string());
}

// ---------------------------------------------------------------------------

struct ReasonArgs {
    fs::path bundle;
    fs::path refs;
    fs::path config;
    fs::path out;
    fs::path mask_out;
    int threads = -1;
};

void run_reason(const Global& g, const ReasonArgs& a) {
    ReasonConfig cfg = a.config.empty() ? ReasonConfig{} : load_reason_config(a.config, g.degrees);
    cfg.seed = g.seed;
    if (a.threads >= 0) cfg.threads = static_cast<unsigned>(a.threads);
    const WatermarkBundle observed = load_bundle(a.bundle);
    const WatermarkBundle refs = load_bundle(a.refs);
    log(g, "reasoning over 24 geometric and 24 photometric orderings");
    const ChainHypothesis h = reason_chain(observed, refs, cfg);
    fs::path mask_path = a.mask_out;
    if (mask_path.empty()) {
        mask_path = a.out;
        mask_path.replace_extension();
        mask_path += "_mask.ttwm";
    }
    if (mask_path.has_parent_path()) fs::create_directories(mask_path.parent_path());
    save_image(h.binarized_mask, mask_path);
    std::string mask_ref = mask_path.string();
    if (a.out.has_parent_path() && mask_path.parent_path() == a.out.parent_path()) {
        mask_ref = mask_path.filename().string();
    }
    write_json(hypothesis_to_json(h, mask_ref), a.out);
    log(g, "wrote " + a.out.string());
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    fs::path a;
    fs::path b;
    std::string metrics = "l1,linf,psnr,ssim,mae";
    fs::path out;
};

void run_evaluate(const Global& g, const EvaluateArgs& a) {
    Image lhs = load_image(a.a);
    Image rhs = load_image(a.b);
    std::vector<std::string> names;
    std::stringstream ss(a.metrics);
    for (std::string name; std::getline(ss, name, ',');) {
        if (!name.empty()) names.push_back(name);
    }
    const MetricReport r = evaluate_metrics(lhs, rhs, names);
    json doc = json::object();
    if (r.l1) doc["l1"] = *r.l1;
    if (r.linf) doc["linf"] = *r.linf;
    if (r.psnr_db) doc["psnr"] = *r.psnr_db;
    if (r.ssim) doc["ssim"] = *r.ssim;
    if (r.mae) doc["mae"] = *r.mae;
    if (r.iou) doc["iou"] = *r.iou;
    std::cout << doc.dump(2) << '\n';
    if (!a.out.empty()) write_json(doc, a.out);
    log(g, "evaluated " + std::to_string(names.size()) + " metrics");
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
    fs::path config;
    fs::path out_dir;
    std::string family;
    int trials = 0;
    double sigma = -1.0;
    int threads = -1;
};

void run_experiment_cmd(const Global& g, const ExperimentArgs& a, bool seed_given) {
    ExperimentConfig cfg = load_experiment_config(a.config, g.degrees);
    if (seed_given) cfg.seed = g.seed;
    if (!a.family.empty()) cfg.family = family_by_name(a.family);
    if (a.trials > 0) cfg.trials = a.trials;
    if (a.sigma >= 0.0) cfg.sigma = a.sigma;
    if (a.threads >= 0) cfg.threads = static_cast<unsigned>(a.threads);
    cfg.validate();
    log(g, "running " + std::to_string(cfg.trials) + " trials of " + cfg.family.name);
    const ExperimentReport report = run_experiment(cfg);
    write_report(report, a.out_dir);
    std::cout << report_aggregate_json(report).dump(2) << '\n';
}

constexpr const char* kSchemas = R"(JSON schemas
  chain.json       {"semantic": {"mask": "<path>" | {"shape": "rectangle"|"ellipse", "seed": n, "frac": f},
                                 "fill": "<path>" | "surrogate"},
                    "photometric": {"order": ["b","c","h","s"], "params": {"b":1, "c":1, "h":0, "s":1}},
                    "geometric": {"order": ["ro","tr","sc","sh"],
                                  "params": {"ro":0, "tr_x":0, "tr_y":0, "sc":1, "sh_x":0, "sh_y":0}}}
                   all blocks optional; angles in radians unless --degrees; hue in cycles
  reason.json      {"max_iter":100, "step":0.1, "fd_step_geo":1e-3, "fd_step_pho":1e-3, "pyramid_levels":3,
                    "prune_iter":50, "restarts":1,
                    "threads":0, "mask_threshold":0.5, "ranges": {"ro":[lo,hi], "tr":[..], "sc":[..], "sh":[..],
                    "b":[..], "c":[..], "h":[..], "s":[..]}}
  experiment.json  {"family": "Syn&Ro" | ... | "custom", "custom": {"geometric":[..], "photometric":[..]},
                    "trials":30, "sigma":0, "channel":"oracle"|"residual", "size":128, "seed":n,
                    "threads":0, "ranges":{..}, "reason":{..}}
  manifest.json    {"sem":"sem.ttwm", "pho":"pho.ttwm", "geo":"geo.ttwm", "height":H, "width":W,
                    "source":"...", "provenance":"reference"|"ground_truth"|"extracted"}
Exit codes: 0 success, 1 usage error, 2 data or format error.)";

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Tell-tale watermark forensics: create reference watermarks, transform, extract and reason "
                 "about editing chains"};
    app.footer(kSchemas);
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Seed for every random draw (default 0x7E117A1E)");
    app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");
    app.add_flag("--degrees", g.degrees, "Read rotation and shear angles in degrees");

    CreateArgs create;
    auto* create_cmd = app.add_subcommand("create-watermarks", "Write the three reference watermarks as a bundle");
    create_cmd->add_option("--out-dir", create.out_dir, "Output directory")->required();
    create_cmd->add_option("--size", create.size, "Square extent in pixels")->check(CLI::PositiveNumber);
    create_cmd->add_option("--height", create.height, "Height (overrides --size)")->check(CLI::PositiveNumber);
    create_cmd->add_option("--width", create.width, "Width (overrides --size)")->check(CLI::PositiveNumber);
    create_cmd->add_option("--delta-phi", create.delta_phi, "Colour wheel rotation in radians");
    create_cmd->add_option("--xi-min", create.xi_min, "Centre wave frequency (cycles per normalized unit)");
    create_cmd->add_option("--xi-max", create.xi_max, "Corner wave frequency (cycles per normalized unit)");
    create_cmd->add_flag("--png", create.png, "Also write 8-bit PNG previews");

    TransformArgs transform;
    auto* transform_cmd = app.add_subcommand(
        "transform", "Apply a chain to an image (--input/--output) or to a reference bundle (--refs/--out-dir)");
    transform_cmd->add_option("--chain", transform.chain, "Chain JSON")->required()->check(CLI::ExistingFile);
    transform_cmd->add_option("--input", transform.input, "Image (.ttwm or .png)");
    transform_cmd->add_option("--output", transform.output, "Output image (.ttwm or .png)");
    transform_cmd->add_option("--refs", transform.refs, "Reference bundle directory or manifest");
    transform_cmd->add_option("--out-dir", transform.out_dir, "Directory for the ground-truth bundle");

    EmbedArgs embed;
    auto* embed_cmd = app.add_subcommand("embed", "Embed the reference watermarks into a carrier (residual scheme)");
    embed_cmd->add_option("--input", embed.input, "Carrier image")->required();
    embed_cmd->add_option("--refs", embed.refs, "Reference bundle directory or manifest")->required();
    embed_cmd->add_option("--output", embed.output, "Marked image")->required();
    embed_cmd->add_option("--alpha", embed.alpha, "Embedding amplitude")->check(CLI::NonNegativeNumber);

    ExtractArgs extract;
    auto* extract_cmd = app.add_subcommand("extract", "Produce an extracted watermark bundle");
    extract_cmd->add_option("--mode", extract.mode, "oracle, residual or file")
        ->required()
        ->check(CLI::IsMember({"oracle", "residual", "file"}));
    extract_cmd->add_option("--out-dir", extract.out_dir, "Output bundle directory")->required();
    extract_cmd->add_option("--refs", extract.refs, "oracle: reference bundle");
    extract_cmd->add_option("--chain", extract.chain, "oracle: chain JSON");
    extract_cmd->add_option("--sigma", extract.sigma, "oracle: Gaussian noise level")->check(CLI::NonNegativeNumber);
    extract_cmd->add_option("--input", extract.input, "residual: marked and edited image");
    extract_cmd->add_option("--clean", extract.clean, "residual: clean carrier for informed extraction");
    extract_cmd->add_option("--alpha", extract.alpha, "residual: embedding amplitude")->check(CLI::PositiveNumber);
    extract_cmd->add_option("--bundle", extract.bundle, "file: externally decoded bundle manifest");

    ReasonArgs reason;
    auto* reason_cmd = app.add_subcommand("reason", "Recover the applied chain from an extracted bundle");
    reason_cmd->add_option("--bundle", reason.bundle, "Extracted bundle directory or manifest")->required();
    reason_cmd->add_option("--refs", reason.refs, "Reference bundle directory or manifest")->required();
    reason_cmd->add_option("--config", reason.config, "Reasoning config JSON");
    reason_cmd->add_option("--out", reason.out, "Hypothesis JSON")->required();
    reason_cmd->add_option("--mask-out", reason.mask_out, "Binarized mask (default <out>_mask.ttwm)");
    reason_cmd->add_option("--threads", reason.threads, "Permutation workers (0 = all cores)")
        ->check(CLI::NonNegativeNumber);

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare two images with fidelity metrics");
    evaluate_cmd->add_option("--a", evaluate.a, "First image")->required();
    evaluate_cmd->add_option("--b", evaluate.b, "Second image")->required();
    evaluate_cmd->add_option("--metrics", evaluate.metrics, "Comma-separated: l1,linf,psnr,ssim,mae,iou");
    evaluate_cmd->add_option("--out", evaluate.out, "Also write the metrics JSON here");

    ExperimentArgs experiment;
    auto* experiment_cmd = app.add_subcommand("experiment", "Run a seeded traceability experiment");
    experiment_cmd->add_option("--config", experiment.config, "Experiment JSON")->required();
    experiment_cmd->add_option("--out-dir", experiment.out_dir, "Directory for report.csv and aggregate.json")
        ->required();
    experiment_cmd->add_option("--family", experiment.family, "Override the chain family");
    experiment_cmd->add_option("--trials", experiment.trials, "Override the trial count")
        ->check(CLI::PositiveNumber);
    experiment_cmd->add_option("--sigma", experiment.sigma, "Override the noise level")
        ->check(CLI::NonNegativeNumber);
    experiment_cmd->add_option("--threads", experiment.threads, "Trial workers (0 = all cores)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::ParseError& e) {
        std::string message = e.what();
        const auto leftover = app.remaining();
        if (!leftover.empty() && !leftover.front().empty() && leftover.front()[0] != '-' &&
            app.get_subcommands().empty()) {
            message = "unknown subcommand '" + leftover.front() + "'";
        }
        // Usage of the subcommand that failed to parse, or of the whole tool.
        const CLI::App* context = &app;
        for (const CLI::App* sub : app.get_subcommands()) context = sub;
        std::cerr << "error: " << message << "\n\n" << context->help();
        return kExitUsage;
    }

    try {
        if (*create_cmd) run_create(g, create);
        if (*transform_cmd) run_transform(g, transform);
        if (*embed_cmd) run_embed(g, embed);
        if (*extract_cmd) run_extract(g, extract);
        if (*reason_cmd) run_reason(g, reason);
        if (*evaluate_cmd) run_evaluate(g, evaluate);
        if (*experiment_cmd) run_experiment_cmd(g, experiment, seed_opt->count() > 0);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace telltale
