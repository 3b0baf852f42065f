#include "telltale/params.hpp"

#include <cmath>
#include <numeric>

#include "telltale/error.hpp"

namespace telltale {

namespace {

constexpr std::array<std::string_view, 4> kGeoNames = {"ro", "tr", "sc", "sh"};
constexpr std::array<std::string_view, 4> kPhoNames = {"b", "c", "h", "s"};

constexpr std::array<std::size_t, 1> kRoSlots = {0};
constexpr std::array<std::size_t, 2> kTrSlots = {1, 2};
constexpr std::array<std::size_t, 1> kScSlots = {3};
constexpr std::array<std::size_t, 2> kShSlots = {4, 5};

template <typename Op>
std::string_view name_of(Op op) noexcept;
template <>
std::string_view name_of(GeoOp op) noexcept { return op_name(op); }
template <>
std::string_view name_of(PhoOp op) noexcept { return op_name(op); }

template <typename Op>
Op parse_op(std::string_view name);
template <>
GeoOp parse_op(std::string_view name) { return parse_geo_op(name); }
template <>
PhoOp parse_op(std::string_view name) { return parse_pho_op(name); }

void check_range(const Range& r, const char* what) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
        throw ParameterError(std::string("invalid range for ") + what);
    }
}

}  // namespace

std::string_view op_name(GeoOp op) noexcept { return kGeoNames[static_cast<std::size_t>(op)]; }
std::string_view op_name(PhoOp op) noexcept { return kPhoNames[static_cast<std::size_t>(op)]; }

GeoOp parse_geo_op(std::string_view name) {
    for (std::size_t i = 0; i < kGeoNames.size(); ++i) {
        if (kGeoNames[i] == name) return static_cast<GeoOp>(i);
    }
    throw ParameterError("unknown geometric operation '" + std::string(name) + "'");
}

PhoOp parse_pho_op(std::string_view name) {
    for (std::size_t i = 0; i < kPhoNames.size(); ++i) {
        if (kPhoNames[i] == name) return static_cast<PhoOp>(i);
    }
    throw ParameterError("unknown photometric operation '" + std::string(name) + "'");
}

void GeoParams::validate() const {
    for (double v : to_array()) {
        if (!std::isfinite(v)) throw ParameterError("geometric parameters must be finite");
    }
    if (sc <= 1e-3) throw ParameterError("scale must exceed 1e-3, got " + std::to_string(sc));
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    if (std::abs(sh_x) >= kHalfPi || std::abs(sh_y) >= kHalfPi) {
        throw ParameterError("shear angles must lie strictly inside (-pi/2, pi/2)");
    }
}

void PhoParams::validate() const {
    for (double v : to_array()) {
        if (!std::isfinite(v)) throw ParameterError("photometric parameters must be finite");
    }
    if (b < 0.0 || c < 0.0 || s < 0.0) {
        throw ParameterError("brightness, contrast and saturation factors must be non-negative");
    }
}

std::span<const std::size_t> geo_param_slots(GeoOp op) noexcept {
    switch (op) {
        case GeoOp::Rotate: return kRoSlots;
        case GeoOp::Translate: return kTrSlots;
        case GeoOp::Scale: return kScSlots;
        case GeoOp::Shear: return kShSlots;
    }
    return {};
}

std::size_t pho_param_slot(PhoOp op) noexcept { return static_cast<std::size_t>(op); }

template <typename Op>
Permutation<Op>::Permutation(const Order& order) : order_(order) {
    std::array<int, 4> seen{};
    for (Op op : order) {
        const auto i = static_cast<int>(op);
        if (i < 0 || i > 3 || seen[static_cast<std::size_t>(i)]++ != 0) {
            throw ParameterError("permutation must contain each member exactly once");
        }
    }
}

template <typename Op>
std::string Permutation<Op>::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < 4; ++i) {
        if (i != 0) out += ',';
        out += name_of(order_[i]);
    }
    return out;
}

template <typename Op>
std::vector<std::string> Permutation<Op>::names() const {
    std::vector<std::string> out;
    for (Op op : order_) out.emplace_back(name_of(op));
    return out;
}

template <typename Op>
Permutation<Op> Permutation<Op>::from_names(std::span<const std::string> names) {
    if (names.size() != 4) throw ParameterError("permutation must list exactly four members");
    Order order{};
    for (std::size_t i = 0; i < 4; ++i) order[i] = parse_op<Op>(names[i]);
    return Permutation(order);
}

template <typename Op>
std::vector<Permutation<Op>> Permutation<Op>::all() {
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::vector<Permutation> out;
    out.reserve(24);
    do {
        out.emplace_back(Order{Op(idx[0]), Op(idx[1]), Op(idx[2]), Op(idx[3])});
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

template class Permutation<GeoOp>;
template class Permutation<PhoOp>;

void ParameterRanges::validate() const {
    check_range(ro, "ro");
    check_range(tr, "tr");
    check_range(sc, "sc");
    check_range(sh, "sh");
    check_range(b, "b");
    check_range(c, "c");
    check_range(h, "h");
    check_range(s, "s");
    if (sc.lo <= 1e-3) throw ParameterError("scale range must stay above 1e-3");
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    if (sh.lo <= -kHalfPi || sh.hi >= kHalfPi) {
        throw ParameterError("shear range must stay inside (-pi/2, pi/2)");
    }
    if (b.lo < 0.0 || c.lo < 0.0 || s.lo < 0.0) {
        throw ParameterError("photometric factor ranges must be non-negative");
    }
}

}  // namespace telltale
