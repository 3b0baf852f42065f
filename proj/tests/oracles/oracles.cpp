#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double fract(double v) { return v - std::floor(v); }

Rgb hexcone(double h, double chroma, double m) {
    const double hp = fract(h) * 6.0;
    const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0, g = 0.0, b = 0.0;
    if (hp < 1.0) {
        r = chroma, g = x;
    } else if (hp < 2.0) {
        r = x, g = chroma;
    } else if (hp < 3.0) {
        g = chroma, b = x;
    } else if (hp < 4.0) {
        g = x, b = chroma;
    } else if (hp < 5.0) {
        r = x, b = chroma;
    } else {
        r = chroma, b = x;
    }
    return {r + m, g + m, b + m};
}

double hue_from_rgb(double r, double g, double b, double hi, double chroma) {
    double hp;
    if (hi == r) {
        hp = std::fmod((g - b) / chroma, 6.0);
    } else if (hi == g) {
        hp = (b - r) / chroma + 2.0;
    } else {
        hp = (r - g) / chroma + 4.0;
    }
    return fract(hp / 6.0);
}

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

double pixel_luma(const Image& img, int y, int x) {
    if (img.channels() == 1) return clamp01(img.at(y, x));
    return clamp01(luma(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)));
}

}  // namespace

Mat3 Mat3::identity() {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
    return r;
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
            r.m[i][j] = s;
        }
    }
    return r;
}

Mat3 rotation(double theta) {
    Mat3 r = Mat3::identity();
    r.m[0][0] = std::cos(theta);
    r.m[0][1] = -std::sin(theta);
    r.m[1][0] = std::sin(theta);
    r.m[1][1] = std::cos(theta);
    return r;
}

Mat3 translation(double tx_pixels, double ty_pixels) {
    Mat3 r = Mat3::identity();
    r.m[0][2] = -tx_pixels;
    r.m[1][2] = -ty_pixels;
    return r;
}

Mat3 scaling(double factor) {
    Mat3 r = Mat3::identity();
    r.m[0][0] = 1.0 / factor;
    r.m[1][1] = 1.0 / factor;
    return r;
}

Mat3 shearing(double sh_x, double sh_y) {
    Mat3 r = Mat3::identity();
    r.m[0][1] = std::tan(sh_x);
    r.m[1][0] = std::tan(sh_y);
    return r;
}

Mat3 recentred(const Mat3& m, int width, int height) {
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    Mat3 to_centre = Mat3::identity();
    to_centre.m[0][2] = cx;
    to_centre.m[1][2] = cy;
    Mat3 from_centre = Mat3::identity();
    from_centre.m[0][2] = -cx;
    from_centre.m[1][2] = -cy;
    return multiply(multiply(to_centre, m), from_centre);
}

Image sample_bilinear(const Image& img, const Mat3& m) {
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    Image out(h, w, c, 0.0f);
    const auto inside = [&](int cx, int cy) { return cx >= 0 && cx < w && cy >= 0 && cy < h; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double u = m.m[0][0] * x + m.m[0][1] * y + m.m[0][2];
            const double v = m.m[1][0] * x + m.m[1][1] * y + m.m[1][2];
            const int u_nw = static_cast<int>(std::floor(u));
            const int v_nw = static_cast<int>(std::floor(v));
            const int u_ne = u_nw + 1, v_ne = v_nw;
            const int u_sw = u_nw, v_sw = v_nw + 1;
            const int u_se = u_nw + 1, v_se = v_nw + 1;
            const double beta_nw = (u_se - u) * (v_se - v);
            const double beta_ne = (u - u_sw) * (v_sw - v);
            const double beta_sw = (u_ne - u) * (v - v_ne);
            const double beta_se = (u - u_nw) * (v - v_nw);
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                if (inside(u_nw, v_nw)) acc += beta_nw * img.at(v_nw, u_nw, ch);
                if (inside(u_ne, v_ne)) acc += beta_ne * img.at(v_ne, u_ne, ch);
                if (inside(u_sw, v_sw)) acc += beta_sw * img.at(v_sw, u_sw, ch);
                if (inside(u_se, v_se)) acc += beta_se * img.at(v_se, u_se, ch);
                out.at(y, x, ch) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Image geometric(const Image& img, const telltale::GeoOrder& order, const telltale::GeoParams& p) {
    using telltale::GeoOp;
    Image cur = img;
    for (GeoOp op : order) {
        Mat3 m;
        switch (op) {
            case GeoOp::Rotate: m = rotation(p.ro); break;
            case GeoOp::Translate: m = translation(p.tr_x * img.width(), p.tr_y * img.height()); break;
            case GeoOp::Scale: m = scaling(p.sc); break;
            case GeoOp::Shear: m = shearing(p.sh_x, p.sh_y); break;
        }
        cur = sample_bilinear(cur, recentred(m, img.width(), img.height()));
    }
    return cur;
}

Rgb hls_to_rgb(double h, double l, double s) {
    l = clamp01(l);
    s = clamp01(s);
    const double chroma = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    return hexcone(h, chroma, l - chroma / 2.0);
}

Rgb hsv_to_rgb(double h, double s, double v) {
    s = clamp01(s);
    v = clamp01(v);
    const double chroma = v * s;
    return hexcone(h, chroma, v - chroma);
}

std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
    r = clamp01(r), g = clamp01(g), b = clamp01(b);
    const double hi = std::max({r, g, b});
    const double lo = std::min({r, g, b});
    const double chroma = hi - lo;
    if (chroma == 0.0) return {0.0, 0.0, hi};
    return {hue_from_rgb(r, g, b, hi, chroma), chroma / hi, hi};
}

std::array<double, 3> rgb_to_hls(double r, double g, double b) {
    r = clamp01(r), g = clamp01(g), b = clamp01(b);
    const double hi = std::max({r, g, b});
    const double lo = std::min({r, g, b});
    const double chroma = hi - lo;
    const double l = (hi + lo) / 2.0;
    if (chroma == 0.0) return {0.0, l, 0.0};
    const double s = chroma / (1.0 - std::abs(2.0 * l - 1.0));
    return {hue_from_rgb(r, g, b, hi, chroma), l, s};
}

Image adjust(const Image& img, telltale::PhoOp op, double value) {
    using telltale::PhoOp;
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    Image out(h, w, c);
    double mu = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) mu += pixel_luma(img, y, x);
    }
    mu /= static_cast<double>(h) * w;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double grey = pixel_luma(img, y, x);
            if (op == PhoOp::Hue && c == 3) {
                auto hsv = rgb_to_hsv(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
                const Rgb rgb = hsv_to_rgb(hsv[0] + value, hsv[1], hsv[2]);
                out.at(y, x, 0) = static_cast<float>(clamp01(rgb.r));
                out.at(y, x, 1) = static_cast<float>(clamp01(rgb.g));
                out.at(y, x, 2) = static_cast<float>(clamp01(rgb.b));
                continue;
            }
            for (int ch = 0; ch < c; ++ch) {
                const double v = img.at(y, x, ch);
                double r = v;
                switch (op) {
                    case PhoOp::Brightness: r = value * v; break;
                    case PhoOp::Contrast: r = value * v + (1.0 - value) * mu; break;
                    case PhoOp::Saturation: r = value * v + (1.0 - value) * grey; break;
                    case PhoOp::Hue: r = v; break;
                }
                out.at(y, x, ch) = static_cast<float>(clamp01(r));
            }
        }
    }
    return out;
}

Image photometric(const Image& img, const telltale::PhoOrder& order, const telltale::PhoParams& p) {
    Image cur = img;
    for (auto op : order) {
        double v = 0.0;
        switch (op) {
            case telltale::PhoOp::Brightness: v = p.b; break;
            case telltale::PhoOp::Contrast: v = p.c; break;
            case telltale::PhoOp::Hue: v = p.h; break;
            case telltale::PhoOp::Saturation: v = p.s; break;
        }
        cur = adjust(cur, op, v);
    }
    return cur;
}

double mean_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<double>(a.data()[i]) - b.data()[i]);
    return s / static_cast<double>(a.size());
}

double max_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    }
    return m;
}

double ssim(const Image& a, const Image& b) {
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    double weights[kWin][kWin];
    double total = 0.0;
    for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
            const double di = i - kWin / 2;
            const double dj = j - kWin / 2;
            weights[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
            total += weights[i][j];
        }
    }
    for (auto& row : weights) {
        for (double& w : row) w /= total;
    }
    double channel_sum = 0.0;
    for (int ch = 0; ch < a.channels(); ++ch) {
        double sum = 0.0;
        int count = 0;
        for (int y = 0; y + kWin <= a.height(); ++y) {
            for (int x = 0; x + kWin <= a.width(); ++x) {
                double ma = 0.0, mb = 0.0;
                for (int i = 0; i < kWin; ++i) {
                    for (int j = 0; j < kWin; ++j) {
                        ma += weights[i][j] * a.at(y + i, x + j, ch);
                        mb += weights[i][j] * b.at(y + i, x + j, ch);
                    }
                }
                double va = 0.0, vb = 0.0, cov = 0.0;
                for (int i = 0; i < kWin; ++i) {
                    for (int j = 0; j < kWin; ++j) {
                        const double da = a.at(y + i, x + j, ch) - ma;
                        const double db = b.at(y + i, x + j, ch) - mb;
                        va += weights[i][j] * da * da;
                        vb += weights[i][j] * db * db;
                        cov += weights[i][j] * da * db;
                    }
                }
                sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
        }
        channel_sum += sum / count;
    }
    return channel_sum / a.channels();
}

}  // namespace oracle
