/**
 * @file affine.hpp
 * @brief Inverse affine matrices, recentring and bilinear resampling.
 *
 * All matrices map output pixel coordinates (x = column, y = row, 0-based)
 * to source coordinates. Bilinear sampling weighs the four integer
 * neighbours of the source point; neighbours outside the image contribute 0.
 */
#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "telltale/image.hpp"
#include "telltale/params.hpp"

namespace telltale {

class AffineMatrix {
public:
    AffineMatrix() noexcept : m_(Eigen::Matrix3d::Identity()) {}
    // Throws ParameterError unless the last row is (0,0,1) and the upper-left
    // 2x2 block has |det| > 1e-9.
    explicit AffineMatrix(const Eigen::Matrix3d& m);

    static AffineMatrix identity() noexcept { return AffineMatrix(); }
    // Pure translation by (tx, ty).
    static AffineMatrix translation(double tx, double ty) noexcept;

    const Eigen::Matrix3d& matrix() const noexcept { return m_; }
    double operator()(int r, int c) const noexcept { return m_(r, c); }

    std::pair<double, double> apply(double x, double y) const noexcept {
        return {m_(0, 0) * x + m_(0, 1) * y + m_(0, 2), m_(1, 0) * x + m_(1, 1) * y + m_(1, 2)};
    }

    bool is_identity() const noexcept { return m_ == Eigen::Matrix3d::Identity(); }
    double det2() const noexcept { return m_(0, 0) * m_(1, 1) - m_(0, 1) * m_(1, 0); }
    AffineMatrix inverse() const;

    friend AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b) {
        return AffineMatrix(a.m_ * b.m_);
    }

private:
    Eigen::Matrix3d m_;
};

// Standard (origin-anchored) inverse matrix of one geometric op.
AffineMatrix inverse_affine(GeoOp kind, const GeoParams& params, int width, int height);

// Conjugate M so it acts about ((width-1)/2, (height-1)/2).
AffineMatrix recenter(const AffineMatrix& m, int width, int height);

// Single composed output->source matrix for a geometric block. Equivalent to
// the sequential warps except at image boundaries, where sequential
// resampling zero-fills after every step.
AffineMatrix compose_geometric(const GeoOrder& order, const GeoParams& params, int width, int height);

Image warp_bilinear(const Image& img, const AffineMatrix& m);

// Same as warp_bilinear, writing into a preallocated image of img's shape.
void warp_bilinear_into(const Image& img, const AffineMatrix& m, Image& out);

// Nearest-neighbour counterpart (rounding source coordinates); used to map
// binary masks without introducing grey edges.
Image warp_nearest(const Image& img, const AffineMatrix& m);

// Precomputed bilinear taps for applying one fixed matrix to many images of
// the same extent. Produces results bitwise identical to warp_bilinear.
class WarpPlan {
public:
    WarpPlan(const AffineMatrix& m, int height, int width);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    // dst must have the same shape as src and the plan's extent.
    void apply(const Image& src, Image& dst) const;

private:
    struct Tap {
        int base = -1;  // index of the north-west corner, -1 when all corners are out of bounds
        double w[4] = {0.0, 0.0, 0.0, 0.0};  // nw, ne, sw, se; zero for out-of-bounds corners
        int offs[4] = {0, 0, 0, 0};          // pixel offsets from base; 0 where the weight is 0
    };

    int height_;
    int width_;
    std::vector<Tap> taps_;
};

}  // namespace telltale
