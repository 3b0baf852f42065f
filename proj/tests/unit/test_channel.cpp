#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "telltale/channel.hpp"
#include "telltale/error.hpp"
#include "telltale/harness.hpp"
#include "telltale/metrics.hpp"
#include "telltale/patterns.hpp"

using namespace telltale;
using testing_support::TempDir;

namespace {

WatermarkBundle refs64() {
    PatternConfig pc;
    pc.height = 64;
    pc.width = 64;
    return make_references(pc);
}

ChainSpec sample(const WatermarkBundle& refs) {
    ChainSpec chain;
    chain.semantic = SemanticEdit{random_mask(refs.height(), refs.width(), 3), Image(refs.height(), refs.width(), 3, 0.5f)};
    chain.photometric = PhotometricBlock{PhoOrder::all()[9], PhoParams{1.1, 0.9, 0.2, 1.2}};
    chain.geometric = GeometricBlock{GeoOrder::all()[4], GeoParams{0.2, 0.05, -0.1, 1.1, 0.1, 0.0}};
    return chain;
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("noiseless oracle extraction is the ground truth") {
    const auto refs = refs64();
    const auto chain = sample(refs);
    const auto gt = ground_truth_watermarks(refs, chain);
    const auto ex = oracle_extract(refs, chain, {0.0, 42});
    CHECK(bitwise_equal(ex.sem, gt.sem));
    CHECK(bitwise_equal(ex.pho, gt.pho));
    CHECK(bitwise_equal(ex.geo, gt.geo));
    CHECK(ex.provenance == Provenance::Extracted);
    CHECK_THROWS_AS(oracle_extract(refs, chain, {-0.1, 0}), ParameterError);
}

TEST_CASE("noisy oracle extraction") {
    const auto refs = make_references({});
    const ChainSpec chain;
    const auto a = oracle_extract(refs, chain, {0.05, 7});
    const auto b = oracle_extract(refs, chain, {0.05, 7});
    CHECK(bitwise_equal(a.pho, b.pho));
    CHECK(bitwise_equal(a.geo, b.geo));
    const auto c = oracle_extract(refs, chain, {0.05, 8});
    CHECK_FALSE(bitwise_equal(a.geo, c.geo));

    // Pixels whose truth sits well inside [0,1] so clamping is negligible.
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < refs.pho.size() && n < 10000; ++i) {
        const double t = refs.pho.data()[i];
        if (t < 0.3 || t > 0.7) continue;
        const double d = a.pho.data()[i] - t;
        sum += d;
        sum2 += d * d;
        ++n;
    }
    REQUIRE(n == 10000);
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(sd - 0.05) <= 0.005);
}

TEST_CASE("payload layout round trip") {
    const auto refs = refs64();
    const Image p = make_payload(refs);
    const auto box = [&](const Image& img, int c, int y, int x) {
        return 0.25 * (static_cast<double>(img.at(2 * y, 2 * x, c)) + img.at(2 * y, 2 * x + 1, c) +
                       img.at(2 * y + 1, 2 * x, c) + img.at(2 * y + 1, 2 * x + 1, c));
    };
    CHECK(p.at(32 + 8, 10, 1) == doctest::Approx(box(refs.pho, 1, 8, 10)).epsilon(1e-6));
    CHECK(p.at(32 + 8, 32 + 10, 2) == doctest::Approx(box(refs.pho, 2, 8, 10)).epsilon(1e-6));
    CHECK(p.at(3, 32 + 7, 0) == doctest::Approx(box(refs.geo, 0, 3, 7)).epsilon(1e-6));
    CHECK(p.at(5, 5, 1) == 0.5f);
    const WatermarkBundle back = decode_payload(p);
    // Decoding replicates each half-resolution box average over its 2x2 block.
    double worst = 0.0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            worst = std::max(worst, std::abs(back.geo.at(y, x) - box(refs.geo, 0, y / 2, x / 2)));
            for (int c = 0; c < 3; ++c) {
                worst = std::max(worst, std::abs(back.pho.at(y, x, c) - box(refs.pho, c, y / 2, x / 2)));
            }
        }
    }
    CHECK(worst <= 1e-6);
    for (float v : back.sem.values()) REQUIRE(v == 0.0f);
}

TEST_CASE("residual embedding") {
    const auto refs = make_references({});
    const Image carrier = synthetic_carrier(128, 128, 5);
    CHECK(bitwise_equal(embed_residual(carrier, refs, 0.0), carrier));

    const Image marked = embed_residual(carrier, refs);
    const Image payload = extract_payload(marked, kDefaultEmbedAlpha, carrier);
    CHECK(oracle::max_abs_diff(payload, make_payload(refs)) <= 1e-6);

    for (std::uint64_t s = 0; s < 20; ++s) {
        const Image x = synthetic_carrier(128, 128, 100 + s);
        REQUIRE(psnr(x, embed_residual(x, refs)) >= 35.0);
    }
    double prev = kPsnrCapDb + 1.0;
    for (double alpha : {0.0, 0.01, 0.02, 0.04, 0.08, 0.16}) {
        const double q = psnr(carrier, embed_residual(carrier, refs, alpha));
        CHECK(q < prev);
        prev = q;
    }
    CHECK_THROWS_AS(embed_residual(Image(10, 10, 3), refs), DimensionError);
    CHECK_THROWS_AS(embed_residual(carrier, refs, -1.0), ParameterError);
}

TEST_CASE("blind extraction recovers a recognisable bundle") {
    const auto refs = make_references({});
    const Image carrier = synthetic_carrier(128, 128, 9);
    const WatermarkBundle blind = extract_residual(embed_residual(carrier, refs));
    CHECK(l1(blind.geo, decode_payload(make_payload(refs)).geo) <= 0.25);
    CHECK(blind.pho.channels() == 3);
}

TEST_CASE("bundle files round trip") {
    TempDir dir("bundle");
    const auto refs = refs64();
    const auto ex = oracle_extract(refs, sample(refs), {0.03, 1});
    const auto manifest = save_bundle(ex, dir.path(), "unit");
    const auto back = load_bundle(manifest);
    CHECK(bitwise_equal(back.sem, ex.sem));
    CHECK(bitwise_equal(back.pho, ex.pho));
    CHECK(bitwise_equal(back.geo, ex.geo));
    CHECK(back.provenance == Provenance::Extracted);
    CHECK(bitwise_equal(load_bundle(dir.path()).geo, ex.geo));

    {
        std::ifstream in(manifest);
        const auto doc = nlohmann::json::parse(in);
        CHECK(doc.at("sem") == "sem.ttwm");
        CHECK(doc.at("height") == 64);
        CHECK(doc.at("source") == "unit");
    }
    std::filesystem::remove(dir / "geo.ttwm");
    CHECK_THROWS_AS(load_bundle(manifest), Error);
    CHECK_THROWS_AS(load_bundle(dir / "missing.json"), Error);
}

}  // TEST_SUITE
