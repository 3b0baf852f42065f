#include "telltale/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "telltale/error.hpp"

namespace telltale {

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kSsimC2 = (0.03 * 1.0) * (0.03 * 1.0);

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) throw DimensionError(std::string(what) + ": image shapes differ");
}

std::array<double, kSsimWindow> gaussian_window() {
    std::array<double, kSsimWindow> w{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable "valid" filtering of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int height, int width,
                                 const std::array<double, kSsimWindow>& w) {
    const int oh = height - kSsimWindow + 1;
    const int ow = width - kSsimWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(height) * static_cast<std::size_t>(ow));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += w[static_cast<std::size_t>(k)] *
                       plane[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(x + k)];
            }
            rows[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * static_cast<std::size_t>(ow));
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += w[static_cast<std::size_t>(k)] *
                       rows[static_cast<std::size_t>(y + k) * static_cast<std::size_t>(ow) +
                            static_cast<std::size_t>(x)];
            }
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = acc;
        }
    }
    return out;
}

double ssim_plane(const Image& a, const Image& b, int channel,
                  const std::array<double, kSsimWindow>& w) {
    const int h = a.height();
    const int wd = a.width();
    const std::size_t n = a.pixel_count();
    std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a.data()[i * static_cast<std::size_t>(a.channels()) + static_cast<std::size_t>(channel)];
        const double y = b.data()[i * static_cast<std::size_t>(b.channels()) + static_cast<std::size_t>(channel)];
        pa[i] = x;
        pb[i] = y;
        paa[i] = x * x;
        pbb[i] = y * y;
        pab[i] = x * y;
    }
    const auto mu_a = filter_valid(pa, h, wd, w);
    const auto mu_b = filter_valid(pb, h, wd, w);
    const auto e_aa = filter_valid(paa, h, wd, w);
    const auto e_bb = filter_valid(pbb, h, wd, w);
    const auto e_ab = filter_valid(pab, h, wd, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + kSsimC1) * (2.0 * cov + kSsimC2)) /
               ((ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2));
    }
    return sum / static_cast<double>(mu_a.size());
}

}  // namespace

double l1(const Image& a, const Image& b) {
    require_same_shape(a, b, "l1");
    double sum = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) sum += std::abs(static_cast<double>(av[i]) - bv[i]);
    return sum / static_cast<double>(av.size());
}

double linf(const Image& a, const Image& b) {
    require_same_shape(a, b, "linf");
    double m = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(static_cast<double>(av[i]) - bv[i]));
    return m;
}

double mae(const Image& a, const Image& b) { return l1(a, b); }

double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    double sum = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = static_cast<double>(av[i]) - bv[i];
        sum += d * d;
    }
    return sum / static_cast<double>(av.size());
}

double psnr(const Image& a, const Image& b) {
    const double e = mse(a, b);
    if (e == 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / e));
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
        throw DimensionError("ssim needs images of at least 11x11 pixels");
    }
    static const auto w = gaussian_window();
    double sum = 0.0;
    for (int c = 0; c < a.channels(); ++c) sum += ssim_plane(a, b, c, w);
    return sum / a.channels();
}

double iou(const Image& a, const Image& b, double threshold) {
    require_same_shape(a, b, "iou");
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        const bool in_a = av[i] >= threshold;
        const bool in_b = bv[i] >= threshold;
        inter += (in_a && in_b) ? 1 : 0;
        uni += (in_a || in_b) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

MetricReport evaluate_metrics(const Image& a, const Image& b, const std::vector<std::string>& names) {
    MetricReport r;
    for (const auto& name : names) {
        if (name == "l1") {
            r.l1 = l1(a, b);
        } else if (name == "linf") {
            r.linf = linf(a, b);
        } else if (name == "psnr") {
            r.psnr_db = psnr(a, b);
        } else if (name == "ssim") {
            r.ssim = ssim(a, b);
        } else if (name == "mae") {
            r.mae = mae(a, b);
        } else if (name == "iou") {
            r.iou = iou(a, b);
        } else {
            throw ParameterError("unknown metric '" + name + "'");
        }
    }
    return r;
}

}  // namespace telltale
