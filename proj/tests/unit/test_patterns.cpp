#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "telltale/affine.hpp"
#include "telltale/error.hpp"
#include "telltale/patterns.hpp"

using namespace telltale;

TEST_SUITE("patterns") {

TEST_CASE("config validation") {
    PatternConfig cfg;
    cfg.height = 1;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.xi_min = 5.0;
    cfg.xi_max = 4.0;
    CHECK_THROWS_AS(make_geometric(cfg), ParameterError);
    cfg = {};
    cfg.xi_min = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("polar coordinates") {
    PatternConfig cfg;
    cfg.height = 9;
    cfg.width = 11;
    const PolarField f = polar_coords(cfg);
    CHECK(f.rho[f.index(0, 0)] == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
    CHECK(f.x_norm[f.index(0, 0)] == -1.0);
    CHECK(f.y_norm[f.index(8, 10)] == 1.0);
    CHECK(f.rho[f.index(4, 5)] == 0.0);
    CHECK(f.phi[f.index(4, 10)] == 0.0);
    CHECK(f.phi[f.index(8, 5)] == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("semantic canvas is blank") {
    const Image s = make_semantic({});
    double sum = 0.0;
    for (float v : s.values()) sum += v;
    CHECK(sum == 0.0);
    CHECK(s.channels() == 1);
}

TEST_CASE("colour wheel matches the reference conversion") {
    PatternConfig cfg;
    cfg.height = 65;
    cfg.width = 65;
    cfg.delta_phi = 0.4;
    const Image p = make_photometric(cfg);
    const PolarField f = polar_coords(cfg);
    double worst = 0.0;
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const std::size_t i = f.index(y, x);
            const double h = (f.phi[i] + cfg.delta_phi) / (2.0 * std::numbers::pi);
            const oracle::Rgb q = oracle::hls_to_rgb(h, 1.0 - f.rho[i] / std::numbers::sqrt2, 1.0);
            worst = std::max({worst, std::abs(p.at(y, x, 0) - q.r), std::abs(p.at(y, x, 1) - q.g),
                              std::abs(p.at(y, x, 2) - q.b)});
        }
    }
    CHECK(worst <= 1e-6);

    const oracle::Rgb red = oracle::hls_to_rgb(0.0, 0.5, 1.0);
    CHECK(red.r == doctest::Approx(1.0));
    CHECK(red.g == doctest::Approx(0.0));

    cfg.delta_phi = 0.0;
    const Image q = make_photometric(cfg);
    for (int c = 0; c < 3; ++c) {
        CHECK(q.at(32, 32, c) == 1.0f);
        CHECK(q.at(0, 0, c) == doctest::Approx(0.0).epsilon(1e-7));
    }
    // x_norm = 0.5 on the +x axis: hue 0, lightness 1 - 0.5 / sqrt 2.
    const double l = 1.0 - 0.5 / std::numbers::sqrt2;
    const oracle::Rgb ref = oracle::hls_to_rgb(0.0, l, 1.0);
    CHECK(q.at(32, 48, 0) == doctest::Approx(ref.r).epsilon(1e-6));
    CHECK(q.at(32, 48, 1) == doctest::Approx(ref.g).epsilon(1e-6));
    CHECK(q.at(32, 48, 2) == doctest::Approx(ref.b).epsilon(1e-6));
}

TEST_CASE("geometric pattern structure") {
    PatternConfig cfg;
    cfg.height = 129;
    cfg.width = 129;
    const Image g = make_geometric(cfg);
    for (int k = 0; k < 129; ++k) {
        REQUIRE(g.at(64, k) == 0.5f);
        REQUIRE(g.at(k, 64) == 0.5f);
    }
    float lo = 1.0f, hi = 0.0f;
    for (int y = 0; y < 129; ++y) {
        for (int x = 0; x < 129; ++x) {
            REQUIRE(g.at(y, x) == g.at(128 - y, 128 - x));
            lo = std::min(lo, g.at(y, x));
            hi = std::max(hi, g.at(y, x));
        }
    }
    CHECK(lo >= 0.0f);
    CHECK(hi <= 1.0f);

    PatternConfig even;
    const Image e = make_geometric(even);
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) REQUIRE(e.at(y, x) == e.at(127 - y, 127 - x));
    }
}

TEST_CASE("patterns are deterministic") {
    PatternConfig cfg;
    cfg.delta_phi = 1.1;
    const auto a = make_references(cfg);
    const auto b = make_references(cfg);
    CHECK(bitwise_equal(a.pho, b.pho));
    CHECK(bitwise_equal(a.geo, b.geo));
    CHECK(bitwise_equal(a.sem, b.sem));
    CHECK(a.provenance == Provenance::Reference);
}

TEST_CASE("rotating the wheel equals shifting its hue") {
    PatternConfig cfg;
    cfg.height = 512;
    cfg.width = 512;
    const Image base = make_photometric(cfg);
    const PolarField f = polar_coords(cfg);
    for (double alpha : {std::numbers::pi / 2, 0.3, -1.2}) {
        // Content rotated by alpha: output angle phi shows source angle phi - alpha.
        const AffineMatrix m = recenter(inverse_affine(GeoOp::Rotate, GeoParams{-alpha}, 512, 512), 512, 512);
        const Image rotated = warp_bilinear(base, m);
        PatternConfig shifted_cfg = cfg;
        shifted_cfg.delta_phi = -alpha;
        const Image shifted = make_photometric(shifted_cfg);
        double sum = 0.0;
        int n = 0;
        for (int y = 0; y < 512; ++y) {
            for (int x = 0; x < 512; ++x) {
                const double r = f.rho[f.index(y, x)];
                if (r < 0.1 || r > 0.95) continue;
                const HsvPixel a = rgb_to_hsv({rotated.at(y, x, 0), rotated.at(y, x, 1), rotated.at(y, x, 2)});
                const HsvPixel b = rgb_to_hsv({shifted.at(y, x, 0), shifted.at(y, x, 1), shifted.at(y, x, 2)});
                const double d = std::abs(a.h - b.h);
                sum += std::min(d, 1.0 - d);
                ++n;
            }
        }
        CHECK(sum / n <= 0.02);
    }
}

}  // TEST_SUITE
