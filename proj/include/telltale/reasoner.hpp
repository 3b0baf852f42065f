/**
 * @file reasoner.hpp
 * @brief Abductive recovery of the applied transformation chain from an
 *        extracted watermark bundle.
 *
 * Geometric reasoning runs first on the 1-channel geometric watermark. The
 * photometric block is then estimated on the 3-channel photometric watermark,
 * rendered through the already-estimated geometric block. The semantic mask
 * is read directly off the semantic watermark.
 *
 * Within a class every one of the 24 operator orderings is optimized
 * independently by projected, sign-normalized finite-difference descent and
 * the ordering with the lowest residual mean-L1 wins; equal losses go to the
 * lexicographically smallest ordering.
 *
 * Descent details: iteration t moves every parameter by
 *   step * 0.5 * (1 + cos(pi t / max_iter)) * halfwidth * g / (|g| + 1e-8)
 * where halfwidth is half the parameter's box and g its central-difference
 * gradient, then projects onto the box. Descent directions in both classes
 * come from a 2x2-averaged image pyramid: the coarsest level during the first
 * ~42% of the iterations, the next level until 85%, full resolution for the
 * rest. Only full-resolution losses (the start point and the fine phase) are
 * tracked and returned; trace entries of coarse iterations repeat the
 * best-so-far value. After the loop each parameter is tried at its identity
 * value and kept there if the loss does not increase.
 *
 * The winning ordering of each class then gets a parsimony pass: every
 * active operator, nearest-to-identity first, is reset to identity and the
 * other parameters re-descended for prune_iter iterations; the reset is kept
 * when the loss does not rise.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "telltale/bundle.hpp"
#include "telltale/image.hpp"
#include "telltale/params.hpp"
#include "telltale/random.hpp"

namespace telltale {

struct ReasonConfig {
    int max_iter = 100;         // objective evaluations per permutation and restart
    double step = 0.1;          // initial update rate, cosine-decayed to 0
    double fd_step_geo = 1e-3;  // central-difference step for every geometric parameter
    double fd_step_pho = 1e-3;  // central-difference step for every photometric parameter
    int pyramid_levels = 3;     // resolution levels (2x2 box averaging); 1 = full resolution only
    int prune_iter = 50;        // iterations per parsimony refinement of a class winner; 0 disables
    int restarts = 1;           // runs per permutation; the first starts at defaults, others at random box points
    std::uint64_t seed = kDefaultSeed;  // only used by restarts beyond the first
    unsigned threads = 0;               // permutation workers; 0 = hardware concurrency
    double mask_threshold = 0.5;
    ParameterRanges ranges;

    // Throws ParameterError on max_iter < 1, restarts < 1, non-positive steps
    // or a threshold outside (0, 1).
    void validate() const;
};

template <typename Op, typename ParamsT>
struct ClassResult {
    using Params = ParamsT;
    Permutation<Op> order;
    ParamsT params;
    double loss = 0.0;          // residual mean-L1; +inf if every permutation failed
    std::vector<double> trace;  // best-so-far loss per iteration of the winning run
};

using GeoResult = ClassResult<GeoOp, GeoParams>;
using PhoResult = ClassResult<PhoOp, PhoParams>;

struct ChainHypothesis {
    GeoResult geometric;
    PhoResult photometric;
    Image semantic_mask;   // extracted semantic watermark, unchanged
    Image binarized_mask;  // semantic_mask thresholded into {0,1}
};

using Objective = std::function<double(std::span<const double>)>;

// Central differences: g_i = (f(x + h_i e_i) - f(x - h_i e_i)) / (2 h_i).
// Throws ParameterError if the sizes differ or a step is not positive.
std::vector<double> fd_gradient(const Objective& objective, std::span<const double> x,
                                std::span<const double> steps);

Image render_geo(const Image& ref, const GeoOrder& order, const GeoParams& params);
// Photometric block on ref followed by the estimated geometric block.
Image render_pho(const Image& ref, const PhoOrder& order, const PhoParams& params, const GeoResult& geo);

// Single-ordering optimizers, starting at identity parameters.
GeoResult optimize_geometric(const Image& ref, const Image& target, const GeoOrder& order,
                             const ReasonConfig& cfg);
PhoResult optimize_photometric(const Image& ref, const Image& target, const PhoOrder& order,
                               const GeoResult& geo, const ReasonConfig& cfg);

GeoResult reason_geometric(const WatermarkBundle& observed, const WatermarkBundle& refs, const ReasonConfig& cfg);
PhoResult reason_photometric(const WatermarkBundle& observed, const WatermarkBundle& refs, const GeoResult& geo,
                             const ReasonConfig& cfg);

struct SemanticEstimate {
    Image mask;
    Image binarized;
};
SemanticEstimate reason_semantic(const WatermarkBundle& observed, double threshold = 0.5);

ChainHypothesis reason_chain(const WatermarkBundle& observed, const WatermarkBundle& refs, const ReasonConfig& cfg);

}  // namespace telltale
