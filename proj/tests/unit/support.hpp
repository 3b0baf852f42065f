// Shared fixtures for the unit suites.
#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "telltale/image.hpp"

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("telltale_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Uniform [lo, hi) values.
inline telltale::Image random_image(int h, int w, int c, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    telltale::Image img(h, w, c);
    for (float& v : img.values()) v = dist(rng);
    return img;
}

// Smooth colour image, away from the clamp limits.
inline telltale::Image smooth_image(int h, int w, int c) {
    telltale::Image img(h, w, c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                img.at(y, x, ch) = static_cast<float>(0.5 + 0.3 * std::sin(0.11 * x + 0.7 * ch) * std::cos(0.07 * y - 0.4 * ch));
            }
        }
    }
    return img;
}

}  // namespace testing_support
