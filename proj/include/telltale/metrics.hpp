/**
 * @file metrics.hpp
 * @brief Fidelity (L1, Linf, PSNR, SSIM), synchronicity (MAE) and
 *        traceability (IoU) metrics. All take images of identical shape.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "telltale/image.hpp"

namespace telltale {

// PSNR reported for identical images.
inline constexpr double kPsnrCapDb = 100.0;

double l1(const Image& a, const Image& b);    // mean absolute difference
double linf(const Image& a, const Image& b);  // max absolute difference
double mae(const Image& a, const Image& b);   // same definition as l1
double mse(const Image& a, const Image& b);

// 10 log10(1 / MSE), capped at kPsnrCapDb.
double psnr(const Image& a, const Image& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, dynamic range 1, averaged over windows fully inside the image
// and then over channels. Images must be at least 11x11.
double ssim(const Image& a, const Image& b);

// |A & B| / |A | B| of masks binarized at `threshold`; 1 when both are empty.
double iou(const Image& a, const Image& b, double threshold = 0.5);

struct MetricReport {
    std::optional<double> l1;
    std::optional<double> linf;
    std::optional<double> psnr_db;
    std::optional<double> ssim;
    std::optional<double> mae;
    std::optional<double> iou;
};

// Evaluate the named metrics ("l1", "linf", "psnr", "ssim", "mae", "iou").
// Throws ParameterError on unknown names.
MetricReport evaluate_metrics(const Image& a, const Image& b, const std::vector<std::string>& names);

}  // namespace telltale
