#include "telltale/affine.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

#include "telltale/error.hpp"

namespace telltale {

namespace {

struct Corners {
    int base;        // -1 when nothing is in bounds
    double w[4];     // nw, ne, sw, se
    int offs[4];     // offsets from base
};

// Bilinear taps of source point (u, v). Out-of-bounds corners get weight 0
// and a zero offset so the tap can be applied without branching.
inline Corners bilinear_corners(double u, double v, int width, int height) noexcept {
    Corners c{-1, {0.0, 0.0, 0.0, 0.0}, {0, 0, 0, 0}};
    if (!(u > -1.0 && u < width && v > -1.0 && v < height)) return c;
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const int x0 = static_cast<int>(fu);
    const int y0 = static_cast<int>(fv);
    const double ax = u - fu;
    const double ay = v - fv;
    const double wn[4] = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
    if (x0 >= 0 && y0 >= 0 && x0 + 1 < width && y0 + 1 < height) {
        c.base = y0 * width + x0;
        c.w[0] = wn[0];
        c.w[1] = wn[1];
        c.w[2] = wn[2];
        c.w[3] = wn[3];
        c.offs[1] = 1;
        c.offs[2] = width;
        c.offs[3] = width + 1;
        return c;
    }
    const int cx[4] = {x0, x0 + 1, x0, x0 + 1};
    const int cy[4] = {y0, y0, y0 + 1, y0 + 1};

    int base = -1;
    for (int k = 0; k < 4; ++k) {
        if (cx[k] >= 0 && cx[k] < width && cy[k] >= 0 && cy[k] < height) {
            base = cy[k] * width + cx[k];
            break;
        }
    }
    if (base < 0) return c;
    c.base = base;
    for (int k = 0; k < 4; ++k) {
        if (cx[k] >= 0 && cx[k] < width && cy[k] >= 0 && cy[k] < height) {
            c.w[k] = wn[k];
            c.offs[k] = cy[k] * width + cx[k] - base;
        }
    }
    return c;
}

template <int C>
inline void apply_corners(const Corners& c, const float* src, float* out) noexcept {
    if (c.base < 0) {
        for (int ch = 0; ch < C; ++ch) out[ch] = 0.0f;
        return;
    }
    const float* p = src + static_cast<std::ptrdiff_t>(c.base) * C;
    for (int ch = 0; ch < C; ++ch) {
        double acc = 0.0;
        acc += c.w[0] * p[c.offs[0] * C + ch];
        acc += c.w[1] * p[c.offs[1] * C + ch];
        acc += c.w[2] * p[c.offs[2] * C + ch];
        acc += c.w[3] * p[c.offs[3] * C + ch];
        out[ch] = static_cast<float>(acc);
    }
}

template <int C>
void warp_kernel(const Image& img, const AffineMatrix& m, Image& out) {
    const int width = img.width();
    const int height = img.height();
    const float* src = img.data();
    float* dst = out.data();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto [u, v] = m.apply(x, y);
            float* o = dst + (static_cast<std::ptrdiff_t>(y) * width + x) * C;
            if (u >= 0.0 && v >= 0.0 && u < width - 1 && v < height - 1) {
                // Interior: truncation equals floor and all four taps exist.
                const int x0 = static_cast<int>(u);
                const int y0 = static_cast<int>(v);
                const double ax = u - x0;
                const double ay = v - y0;
                const double w0 = (1.0 - ax) * (1.0 - ay);
                const double w1 = ax * (1.0 - ay);
                const double w2 = (1.0 - ax) * ay;
                const double w3 = ax * ay;
                const float* p = src + (static_cast<std::ptrdiff_t>(y0) * width + x0) * C;
                const float* q = p + static_cast<std::ptrdiff_t>(width) * C;
                for (int ch = 0; ch < C; ++ch) {
                    double acc = 0.0;
                    acc += w0 * p[ch];
                    acc += w1 * p[C + ch];
                    acc += w2 * q[ch];
                    acc += w3 * q[C + ch];
                    o[ch] = static_cast<float>(acc);
                }
                continue;
            }
            apply_corners<C>(bilinear_corners(u, v, width, height), src, o);
        }
    }
}

}  // namespace

AffineMatrix::AffineMatrix(const Eigen::Matrix3d& m) : m_(m) {
    if (m(2, 0) != 0.0 || m(2, 1) != 0.0 || m(2, 2) != 1.0) {
        throw ParameterError("affine matrix must have last row (0, 0, 1)");
    }
    if (!m.allFinite()) throw ParameterError("affine matrix entries must be finite");
    if (!(std::abs(det2()) > 1e-9)) throw ParameterError("affine matrix is not invertible");
}

AffineMatrix AffineMatrix::translation(double tx, double ty) noexcept {
    AffineMatrix t;
    t.m_(0, 2) = tx;
    t.m_(1, 2) = ty;
    return t;
}

AffineMatrix AffineMatrix::inverse() const {
    Eigen::Matrix3d inv = m_.inverse();
    inv.row(2) << 0.0, 0.0, 1.0;
    return AffineMatrix(inv);
}

AffineMatrix inverse_affine(GeoOp kind, const GeoParams& params, int width, int height) {
    params.validate();
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    switch (kind) {
        case GeoOp::Rotate:
            m(0, 0) = std::cos(params.ro);
            m(0, 1) = -std::sin(params.ro);
            m(1, 0) = std::sin(params.ro);
            m(1, 1) = std::cos(params.ro);
            break;
        case GeoOp::Translate:
            m(0, 2) = -params.tr_x * width;
            m(1, 2) = -params.tr_y * height;
            break;
        case GeoOp::Scale:
            m(0, 0) = 1.0 / params.sc;
            m(1, 1) = 1.0 / params.sc;
            break;
        case GeoOp::Shear:
            m(0, 1) = std::tan(params.sh_x);
            m(1, 0) = std::tan(params.sh_y);
            break;
    }
    return AffineMatrix(m);
}

AffineMatrix recenter(const AffineMatrix& m, int width, int height) {
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    return AffineMatrix::translation(cx, cy) * m * AffineMatrix::translation(-cx, -cy);
}

AffineMatrix compose_geometric(const GeoOrder& order, const GeoParams& params, int width, int height) {
    AffineMatrix total;
    for (GeoOp op : order) {
        total = total * recenter(inverse_affine(op, params, width, height), width, height);
    }
    return total;
}

Image warp_bilinear(const Image& img, const AffineMatrix& m) {
    Image out(img.height(), img.width(), img.channels());
    warp_bilinear_into(img, m, out);
    return out;
}

void warp_bilinear_into(const Image& img, const AffineMatrix& m, Image& out) {
    if (!img.same_shape(out)) throw DimensionError("warp output must match the input shape");
    if (img.channels() == 1) {
        warp_kernel<1>(img, m, out);
    } else {
        warp_kernel<3>(img, m, out);
    }
}

Image warp_nearest(const Image& img, const AffineMatrix& m) {
    Image out(img.height(), img.width(), img.channels());
    const int c = img.channels();
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto [u, v] = m.apply(x, y);
            const double ru = std::round(u);
            const double rv = std::round(v);
            if (!(ru >= 0.0 && ru < img.width() && rv >= 0.0 && rv < img.height())) continue;
            for (int ch = 0; ch < c; ++ch) {
                out.at(y, x, ch) = img.at(static_cast<int>(rv), static_cast<int>(ru), ch);
            }
        }
    }
    return out;
}

WarpPlan::WarpPlan(const AffineMatrix& m, int height, int width) : height_(height), width_(width) {
    taps_.resize(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto [u, v] = m.apply(x, y);
            const Corners c = bilinear_corners(u, v, width, height);
            Tap& t = taps_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                           static_cast<std::size_t>(x)];
            t.base = c.base;
            for (int k = 0; k < 4; ++k) {
                t.w[k] = c.w[k];
                t.offs[k] = c.offs[k];
            }
        }
    }
}

void WarpPlan::apply(const Image& src, Image& dst) const {
    if (src.height() != height_ || src.width() != width_ || !src.same_shape(dst)) {
        throw DimensionError("warp plan extent does not match images");
    }
    const float* in = src.data();
    float* out = dst.data();
    const auto apply_all = [&]<int C>() {
        for (std::size_t i = 0; i < taps_.size(); ++i) {
            const Tap& t = taps_[i];
            const Corners c{t.base, {t.w[0], t.w[1], t.w[2], t.w[3]},
                            {t.offs[0], t.offs[1], t.offs[2], t.offs[3]}};
            apply_corners<C>(c, in, out + i * C);
        }
    };
    if (src.channels() == 1) {
        apply_all.template operator()<1>();
    } else {
        apply_all.template operator()<3>();
    }
}

}  // namespace telltale
