/**
 * @file params.hpp
 * @brief Geometric and photometric parameter vectors, intra-class
 *        permutations and the sampling/projection boxes.
 */
#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace telltale {

enum class GeoOp { Rotate = 0, Translate = 1, Scale = 2, Shear = 3 };
enum class PhoOp { Brightness = 0, Contrast = 1, Hue = 2, Saturation = 3 };

std::string_view op_name(GeoOp op) noexcept;  // "ro", "tr", "sc", "sh"
std::string_view op_name(PhoOp op) noexcept;  // "b", "c", "h", "s"

// Throw ParameterError on unknown names.
GeoOp parse_geo_op(std::string_view name);
PhoOp parse_pho_op(std::string_view name);

// Rotation and shear angles are clockwise radians; translation is a fraction
// of width/height; scale is an isotropic factor.
struct GeoParams {
    double ro = 0.0;
    double tr_x = 0.0;
    double tr_y = 0.0;
    double sc = 1.0;
    double sh_x = 0.0;
    double sh_y = 0.0;

    static constexpr std::size_t kSize = 6;
    static constexpr std::array<std::string_view, kSize> kNames = {"ro",  "tr_x", "tr_y",
                                                                   "sc",  "sh_x", "sh_y"};

    std::array<double, kSize> to_array() const noexcept { return {ro, tr_x, tr_y, sc, sh_x, sh_y}; }
    static GeoParams from_array(std::span<const double> v) noexcept {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
    // Throws ParameterError: non-finite values, sc <= 1e-3, |sh| >= pi/2.
    void validate() const;
    bool operator==(const GeoParams&) const = default;
};

// Brightness, contrast and saturation are factors; hue is a shift in
// fractions of a full cycle.
struct PhoParams {
    double b = 1.0;
    double c = 1.0;
    double h = 0.0;
    double s = 1.0;

    static constexpr std::size_t kSize = 4;
    static constexpr std::array<std::string_view, kSize> kNames = {"b", "c", "h", "s"};

    std::array<double, kSize> to_array() const noexcept { return {b, c, h, s}; }
    static PhoParams from_array(std::span<const double> v) noexcept { return {v[0], v[1], v[2], v[3]}; }
    // Throws ParameterError: non-finite values or negative b/c/s.
    void validate() const;
    bool operator==(const PhoParams&) const = default;
};

// Indices into GeoParams::to_array() driven by each geometric op.
std::span<const std::size_t> geo_param_slots(GeoOp op) noexcept;
// Index into PhoParams::to_array() driven by each photometric op.
std::size_t pho_param_slot(PhoOp op) noexcept;

// An ordering of the four members of one transformation class.
template <typename Op>
class Permutation {
public:
    using Order = std::array<Op, 4>;

    Permutation() noexcept : order_{Op(0), Op(1), Op(2), Op(3)} {}
    explicit Permutation(const Order& order);

    const Order& order() const noexcept { return order_; }
    Op operator[](std::size_t i) const noexcept { return order_[i]; }
    auto begin() const noexcept { return order_.begin(); }
    auto end() const noexcept { return order_.end(); }

    // Position of op within the order.
    std::size_t position(Op op) const noexcept {
        return static_cast<std::size_t>(std::find(order_.begin(), order_.end(), op) - order_.begin());
    }

    // Comma-separated member names, e.g. "ro,tr,sc,sh".
    std::string to_string() const;
    std::vector<std::string> names() const;
    // Throws ParameterError unless names hold each member exactly once.
    static Permutation from_names(std::span<const std::string> names);

    // All 24 orderings, lexicographic on the canonical member order.
    static std::vector<Permutation> all();

    auto operator<=>(const Permutation& other) const noexcept {
        for (std::size_t i = 0; i < 4; ++i) {
            if (order_[i] != other.order_[i]) {
                return static_cast<int>(order_[i]) <=> static_cast<int>(other.order_[i]);
            }
        }
        return std::strong_ordering::equal;
    }
    bool operator==(const Permutation& other) const noexcept { return order_ == other.order_; }

private:
    Order order_;
};

using GeoOrder = Permutation<GeoOp>;
using PhoOrder = Permutation<PhoOp>;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double clamp(double v) const noexcept { return std::clamp(v, lo, hi); }
    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
    bool operator==(const Range&) const = default;
};

// Sampling boxes; the reasoner projects its iterates onto the same boxes.
struct ParameterRanges {
    Range ro{-std::numbers::pi / 6.0, std::numbers::pi / 6.0};  // +-30 degrees
    Range tr{-0.2, 0.2};
    Range sc{0.8, 1.2};
    Range sh{-std::numbers::pi / 12.0, std::numbers::pi / 12.0};  // +-15 degrees
    Range b{0.75, 1.25};
    Range c{0.75, 1.25};
    Range h{-0.35, 0.35};
    Range s{0.75, 1.25};

    std::array<Range, GeoParams::kSize> geo_box() const noexcept { return {ro, tr, tr, sc, sh, sh}; }
    std::array<Range, PhoParams::kSize> pho_box() const noexcept { return {b, c, h, s}; }

    // Throws ParameterError if a range is inverted or leaves the validity domain.
    void validate() const;
    bool operator==(const ParameterRanges&) const = default;
};

}  // namespace telltale
