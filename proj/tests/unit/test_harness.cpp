#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "telltale/error.hpp"
#include "telltale/harness.hpp"

using namespace telltale;
using nlohmann::json;

namespace {

ExperimentConfig small_config(const std::string& family, int trials) {
    ExperimentConfig cfg;
    cfg.family = family_by_name(family);
    cfg.trials = trials;
    cfg.height = cfg.width = 48;
    cfg.threads = 1;
    cfg.reason.max_iter = 20;
    cfg.reason.prune_iter = 10;
    cfg.reason.threads = 1;
    return cfg;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("named families cover the twelve rows and reject unknown names") {
    CHECK(named_families().size() == 12);
    const FamilySpec ro = family_by_name("Syn&Ro");
    CHECK(ro.geometric == std::vector<GeoOp>{GeoOp::Rotate});
    CHECK(ro.photometric.empty());
    CHECK(ro.semantic);
    const FamilySpec hs = family_by_name("Syn&H&Sc");
    CHECK(hs.geometric == std::vector<GeoOp>{GeoOp::Scale});
    CHECK(hs.photometric == std::vector<PhoOp>{PhoOp::Hue});
    CHECK_THROWS_AS(family_by_name("Syn&Zoom"), ParameterError);
}

TEST_CASE("sample_chain draws only the family's parameters") {
    const ParameterRanges ranges;
    const SampledChain s = sample_chain(family_by_name("Syn&Ro"), ranges, 7, 32, 32);
    REQUIRE(s.chain.geometric.has_value());
    CHECK_FALSE(s.chain.photometric.has_value());
    REQUIRE(s.chain.semantic.has_value());
    const GeoParams& p = s.chain.geometric->params;
    CHECK(p.ro != 0.0);
    CHECK(ranges.ro.contains(p.ro));
    CHECK(p.tr_x == 0.0);
    CHECK(p.tr_y == 0.0);
    CHECK(p.sc == 1.0);
    CHECK(p.sh_x == 0.0);
    CHECK(p.sh_y == 0.0);

    const SampledChain c = sample_chain(family_by_name("Syn&C&Tr"), ranges, 7, 32, 32);
    REQUIRE(c.chain.photometric.has_value());
    const PhoParams& q = c.chain.photometric->params;
    CHECK(q.b == 1.0);
    CHECK(q.h == 0.0);
    CHECK(q.s == 1.0);
    CHECK(ranges.c.contains(q.c));
    CHECK(ranges.tr.contains(c.chain.geometric->params.tr_x));
    CHECK(ranges.tr.contains(c.chain.geometric->params.tr_y));
}

TEST_CASE("sample_chain is deterministic per seed") {
    const ParameterRanges ranges;
    const FamilySpec fam = family_by_name("Syn&S&Sh");
    const SampledChain a = sample_chain(fam, ranges, 99, 24, 24);
    const SampledChain b = sample_chain(fam, ranges, 99, 24, 24);
    const SampledChain c = sample_chain(fam, ranges, 100, 24, 24);
    CHECK(a.chain.geometric->params == b.chain.geometric->params);
    CHECK(a.chain.geometric->order == b.chain.geometric->order);
    CHECK(a.chain.photometric->params == b.chain.photometric->params);
    CHECK(std::equal(a.chain.semantic->mask.data(), a.chain.semantic->mask.data() + a.chain.semantic->mask.size(),
                     b.chain.semantic->mask.data()));
    CHECK_FALSE(a.chain.geometric->params == c.chain.geometric->params);
}

TEST_CASE("rotation draws are uniform over the box") {
    const ParameterRanges ranges;
    const FamilySpec fam{"ro-only", {GeoOp::Rotate}, {}, false};
    constexpr int n = 10000;
    double sum = 0.0;
    double lo = 1e9;
    double hi = -1e9;
    for (int i = 0; i < n; ++i) {
        const double ro = sample_chain(fam, ranges, mix_seed(3, i), 16, 16).chain.geometric->params.ro;
        REQUIRE(ranges.ro.contains(ro));
        sum += ro;
        lo = std::min(lo, ro);
        hi = std::max(hi, ro);
    }
    const double width = ranges.ro.hi - ranges.ro.lo;
    const double sigma = width / std::sqrt(12.0);
    CHECK(std::abs(sum / n) <= 3.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK(lo < ranges.ro.lo + 0.01 * width);
    CHECK(hi > ranges.ro.hi - 0.01 * width);
}

TEST_CASE("report errors use cycles, extents and circular hue") {
    CHECK(report_error(0, 0.0, std::numbers::pi) == doctest::Approx(0.5));
    CHECK(report_error(4, 0.1, -0.1) == doctest::Approx(0.2 / (2.0 * std::numbers::pi)));
    CHECK(report_error(1, 0.1, 0.15) == doctest::Approx(0.05));
    CHECK(report_error(3, 1.2, 0.9) == doctest::Approx(0.3));
    CHECK(report_error(8, 0.3, -0.3) == doctest::Approx(0.4));
    CHECK(report_error(8, 0.45, -0.45) == doctest::Approx(0.1));
    CHECK(report_error(8, 0.2, 0.2) == 0.0);
}

TEST_CASE("aggregate statistics equal the per-row means") {
    ExperimentReport report;
    report.config = small_config("Syn&Ro", 3);
    const double errs[] = {0.01, 0.02, 0.06};
    for (int i = 0; i < 3; ++i) {
        TrialRow row;
        row.trial = i;
        row.ok = true;
        row.error[0] = errs[i];
        row.iou = 0.9 + 0.01 * i;
        report.rows.push_back(row);
    }
    TrialRow failed;
    failed.trial = 3;
    failed.ok = false;
    failed.error[0] = 100.0;
    report.rows.push_back(failed);
    aggregate(report);
    CHECK(report.failures == 1);
    CHECK(report.errors[0].count == 3);
    CHECK(std::abs(report.errors[0].mean - 0.03) <= 1e-12);
    CHECK(std::abs(report.iou.mean - 0.91) <= 1e-12);
    CHECK(std::abs(report.mean_error({"ro"}) - 0.03) <= 1e-12);
    CHECK_THROWS_AS(report.mean_error({"zoom"}), ParameterError);
    const auto active = report.active_params();
    REQUIRE(active.size() == 1);
    CHECK(active[0] == "ro");
}

TEST_CASE("experiment config parsing") {
    const json doc = json::parse(R"({"family": "Syn&H", "trials": 4, "sigma": 0.05, "channel": "residual",
                                     "size": 64, "seed": 11, "ranges": {"ro": [-10, 10]},
                                     "reason": {"max_iter": 40}})");
    const ExperimentConfig cfg = experiment_config_from_json(doc, true);
    CHECK(cfg.family.name == "Syn&H");
    CHECK(cfg.trials == 4);
    CHECK(cfg.sigma == 0.05);
    CHECK(cfg.channel == ChannelMode::Residual);
    CHECK(cfg.height == 64);
    CHECK(cfg.width == 64);
    CHECK(cfg.seed == 11);
    CHECK(cfg.ranges.ro.hi == doctest::Approx(10.0 * std::numbers::pi / 180.0));
    CHECK(cfg.reason.max_iter == 40);
    CHECK(cfg.reason.ranges == cfg.ranges);

    const ExperimentConfig custom = experiment_config_from_json(
        json::parse(R"({"family": "custom", "custom": {"geometric": ["ro", "sh"], "photometric": ["b"]}})"));
    CHECK(custom.family.geometric == std::vector<GeoOp>{GeoOp::Rotate, GeoOp::Shear});
    CHECK(custom.family.photometric == std::vector<PhoOp>{PhoOp::Brightness});

    CHECK_THROWS_AS(experiment_config_from_json(json::array()), FormatError);
    CHECK_THROWS_AS(experiment_config_from_json(json::parse(R"({"channel": "telepathy"})")), FormatError);
    CHECK_THROWS_AS(experiment_config_from_json(json::parse(R"({"family": "custom"})")), FormatError);
    CHECK_THROWS_AS(experiment_config_from_json(json::parse(R"({"trials": 0})")), ParameterError);
    CHECK_THROWS_AS(experiment_config_from_json(json::parse(R"({"sigma": -1})")), ParameterError);
    CHECK_THROWS_AS(experiment_config_from_json(json::parse(R"({"size": 8})")), ParameterError);
}

TEST_CASE("report.csv header lists the documented columns") {
    ExperimentReport report;
    report.config = small_config("Syn&Ro", 1);
    const std::string header = first_line(report_csv(report));
    CHECK(header.rfind("trial,seed,family,status,message,true_ro,true_tr_x", 0) == 0);
    CHECK(header.find("err_s,true_geo_order") != std::string::npos);
    CHECK(header.ends_with("pho_residual,mask_fraction,iou"));
    std::size_t commas = 0;
    for (char ch : header) commas += ch == ',' ? 1 : 0;
    CHECK(commas + 1 == 5 + 3 * kReportParams + 10);
}

TEST_CASE("small experiment is reproducible and writes both artifacts") {
    const ExperimentConfig cfg = small_config("Syn&Ro", 2);
    const ExperimentReport a = run_experiment(cfg);
    const ExperimentReport b = run_experiment(cfg);
    REQUIRE(a.rows.size() == 2);
    CHECK(a.failures == 0);
    CHECK(report_csv(a) == report_csv(b));
    for (const auto& row : a.rows) {
        CHECK(row.ok);
        CHECK(row.error[0] <= 0.01);
        CHECK(row.iou >= 0.9);
    }

    testing_support::TempDir dir("harness");
    write_report(a, dir.path());
    std::ifstream csv(dir.path() / "report.csv", std::ios::binary);
    std::stringstream text;
    text << csv.rdbuf();
    CHECK(text.str() == report_csv(a));
    std::ifstream agg(dir.path() / "aggregate.json");
    const json doc = json::parse(agg);
    CHECK(doc.at("family") == "Syn&Ro");
    CHECK(doc.at("trials") == 2);
    CHECK(doc.at("failures") == 0);
    CHECK(doc.at("active_params") == json::array({"ro"}));
    CHECK(doc.at("errors").at("ro").at("n") == 2);
}

TEST_CASE("residual channel trial runs end to end") {
    ExperimentConfig cfg = small_config("Syn&B", 1);
    cfg.channel = ChannelMode::Residual;
    const ExperimentReport r = run_experiment(cfg);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].ok);
    CHECK(std::isfinite(r.rows[0].pho_loss));
}

}  // TEST_SUITE
