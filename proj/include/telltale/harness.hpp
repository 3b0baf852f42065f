/**
 * @file harness.hpp
 * @brief Seeded batch experiments: sample chains from a family, extract,
 *        reason, and tabulate per-parameter recovery errors.
 *
 * Error units: rotation and shear angles are reported in fractions of a full
 * cycle (|delta| / 2 pi), hue in cycles (circular distance), translation in
 * fractions of the image extent, and scale, brightness, contrast and
 * saturation in factor units.
 *
 * report.csv columns, in order:
 *   trial, seed, family, status, message,
 *   true_<p>, est_<p>, err_<p>   for p in ro tr_x tr_y sc sh_x sh_y b c h s,
 *   true_geo_order, est_geo_order, true_pho_order, est_pho_order,
 *   geo_loss, pho_loss, geo_residual, pho_residual, mask_fraction, iou
 *
 * Orders are written as "ro tr sc sh" style space-separated names, numbers
 * with 17 significant digits. Wall-clock times are only written to
 * aggregate.json so that the CSV is byte-identical across re-runs.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "telltale/params.hpp"
#include "telltale/random.hpp"
#include "telltale/reasoner.hpp"
#include "telltale/transforms.hpp"

namespace telltale {

// Active operators of a chain family. Every family includes the semantic
// edit; the named families are "Syn&<ops>" with one or two edit operators.
struct FamilySpec {
    std::string name;
    std::vector<GeoOp> geometric;
    std::vector<PhoOp> photometric;
    bool semantic = true;
};

// The twelve named families: Syn&B ... Syn&Sh, Syn&B&Ro, Syn&C&Tr,
// Syn&H&Sc, Syn&S&Sh.
const std::vector<FamilySpec>& named_families();
// Looks up a named family (throws ParameterError for unknown names).
FamilySpec family_by_name(std::string_view name);

enum class ChannelMode { Oracle, Residual };
std::string_view channel_name(ChannelMode mode) noexcept;

struct ExperimentConfig {
    FamilySpec family = family_by_name("Syn&Ro");
    int trials = 30;
    double sigma = 0.0;  // oracle-channel extraction noise
    ChannelMode channel = ChannelMode::Oracle;
    int height = 128;
    int width = 128;
    ParameterRanges ranges;
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 0;  // 0 = hardware concurrency
    ReasonConfig reason;

    // Throws ParameterError for trials < 1, sigma < 0, extents < 11 (the
    // SSIM window) or invalid ranges / reasoning settings.
    void validate() const;
};

// Parses an experiment document:
//   {"family": "Syn&Ro" | "custom", "custom": {"geometric": [...], "photometric": [...], "semantic": true},
//    "trials": 30, "sigma": 0.0, "channel": "oracle" | "residual", "size": 128 | "height"/"width",
//    "seed": 2115140126, "threads": 0,
//    "ranges": {"ro": [lo, hi], "tr": [...], "sc": [...], "sh": [...], "b": [...], "c": [...], "h": [...], "s": [...]},
//    "reason": {"max_iter": 100, "step": 0.1, "fd_step_geo": 1e-3, "fd_step_pho": 1e-3, "prune_iter": 50, "restarts": 1}}
// Angle ranges are radians unless `degrees` is set. Throws FormatError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, bool degrees = false);
ExperimentConfig load_experiment_config(const std::filesystem::path& path, bool degrees = false);

struct SampledChain {
    ChainSpec chain;
    MaskSpec mask;  // parameters of the semantic mask, when present
};

// Uniform draws of the family's active parameters (inactive ones stay at
// identity) and uniformly random intra-class orders. The semantic fill is a
// surrogate of `carrier` when given, neutral grey otherwise.
SampledChain sample_chain(const FamilySpec& family, const ParameterRanges& ranges, std::uint64_t seed, int height,
                          int width, const Image* carrier = nullptr);

// Smooth random 3-channel carrier (a few low-frequency cosines per channel,
// values within [0.15, 0.85]) used by the residual channel.
Image synthetic_carrier(int height, int width, std::uint64_t seed);

inline constexpr std::size_t kReportParams = 10;
inline constexpr std::array<std::string_view, kReportParams> kReportParamNames = {
    "ro", "tr_x", "tr_y", "sc", "sh_x", "sh_y", "b", "c", "h", "s"};

struct TrialRow {
    int trial = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string message;
    std::array<double, kReportParams> truth{};
    std::array<double, kReportParams> estimate{};
    std::array<double, kReportParams> error{};
    std::string true_geo_order;
    std::string est_geo_order;
    std::string true_pho_order;
    std::string est_pho_order;
    double geo_loss = 0.0;
    double pho_loss = 0.0;
    double geo_residual = 0.0;  // mean-L1 of the independently re-rendered geometric watermark
    double pho_residual = 0.0;
    double mask_fraction = 0.0;
    double iou = 0.0;
    double seconds = 0.0;  // wall time; aggregate only
};

struct ParamStats {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialRow> rows;
    std::array<ParamStats, kReportParams> errors{};  // over successful trials
    ParamStats iou;
    ParamStats geo_residual;
    ParamStats pho_residual;
    int failures = 0;
    double wall_seconds = 0.0;

    // Parameters driven by the family's active operators.
    std::vector<std::string_view> active_params() const;
    // Mean error over the successful trials and the given parameter names.
    double mean_error(std::initializer_list<std::string_view> params) const;
};

// Error of one estimate in the reporting unit of parameter `index`.
double report_error(std::size_t index, double truth, double estimate) noexcept;

// Runs one trial (no exceptions escape; failures are recorded in the row).
TrialRow run_trial(const ExperimentConfig& cfg, const WatermarkBundle& refs, int index, unsigned reason_threads);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Fills the aggregate statistics from the rows.
void aggregate(ExperimentReport& report);

std::string report_csv(const ExperimentReport& report);
nlohmann::json report_aggregate_json(const ExperimentReport& report);
// Writes report.csv and aggregate.json into dir (created if needed).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace telltale
