#include "telltale/reasoner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "telltale/affine.hpp"
#include "telltale/error.hpp"
#include "telltale/parallel.hpp"
#include "telltale/transforms.hpp"

namespace telltale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mean absolute difference; images are known to share a shape.
double mean_abs(const Image& a, const Image& b) noexcept {
    const float* pa = a.data();
    const float* pb = b.data();
    const std::size_t n = a.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(pa[i]) - pb[i]);
    return acc / static_cast<double>(n);
}

template <typename Op>
std::uint64_t order_code(const Permutation<Op>& order) noexcept {
    std::uint64_t code = 0;
    for (Op op : order) code = code * 4 + static_cast<std::uint64_t>(op);
    return code;
}

// Renders the geometric watermark for a parameter vector, reusing the warped
// stages of the last anchored vector up to the first op whose parameters
// differ. Results are bitwise identical to apply_geometric.
class GeoObjective {
public:
    using Vec = std::array<double, GeoParams::kSize>;

    GeoObjective(const Image& ref, const Image& target, const GeoOrder& order)
        : ref_(ref), target_(target), order_(order) {
        for (auto& s : stages_) s = Image(ref.height(), ref.width(), ref.channels());
        for (auto& s : scratch_) s = Image(ref.height(), ref.width(), ref.channels());
        stage_ptr_[0] = &ref_;
    }

    // Evaluates theta and makes it the cached prefix for later evaluations.
    double anchor(const Vec& theta) {
        const std::size_t from = valid_ ? first_change(theta) : 0;
        if (valid_ && from == 4) return anchor_loss_;
        anchor_ = theta;
        valid_ = false;
        const GeoParams p = GeoParams::from_array(theta);
        for (std::size_t k = from; k < 4; ++k) {
            const AffineMatrix m = step_matrix(order_[k], p);
            if (m.is_identity()) {
                stage_ptr_[k + 1] = stage_ptr_[k];
            } else {
                warp_bilinear_into(*stage_ptr_[k], m, stages_[k]);
                stage_ptr_[k + 1] = &stages_[k];
            }
        }
        anchor_loss_ = mean_abs(*stage_ptr_[4], target_);
        valid_ = true;
        return anchor_loss_;
    }

    // Evaluates theta without disturbing the cache.
    double operator()(const Vec& theta) {
        const std::size_t from = valid_ ? first_change(theta) : 0;
        if (valid_ && from == 4) return anchor_loss_;
        const GeoParams p = GeoParams::from_array(theta);
        const Image* cur = valid_ ? stage_ptr_[from] : &ref_;
        std::size_t flip = 0;
        for (std::size_t k = from; k < 4; ++k) {
            const AffineMatrix m = step_matrix(order_[k], p);
            if (m.is_identity()) continue;
            warp_bilinear_into(*cur, m, scratch_[flip]);
            cur = &scratch_[flip];
            flip ^= 1U;
        }
        return mean_abs(*cur, target_);
    }

private:
    AffineMatrix step_matrix(GeoOp op, const GeoParams& p) const {
        return recenter(inverse_affine(op, p, ref_.width(), ref_.height()), ref_.width(), ref_.height());
    }

    std::size_t first_change(const Vec& theta) const noexcept {
        for (std::size_t k = 0; k < 4; ++k) {
            for (std::size_t slot : geo_param_slots(order_[k])) {
                if (theta[slot] != anchor_[slot]) return k;
            }
        }
        return 4;
    }

    const Image& ref_;
    const Image& target_;
    GeoOrder order_;
    std::array<Image, 4> stages_;
    std::array<const Image*, 5> stage_ptr_{};
    std::array<Image, 2> scratch_;
    Vec anchor_{};
    double anchor_loss_ = kInf;
    bool valid_ = false;
};

// Photometric counterpart: adjustment stages are cached per prefix, and the
// fixed estimated geometric block is applied through precomputed warp plans.
class PhoObjective {
public:
    using Vec = std::array<double, PhoParams::kSize>;

    PhoObjective(const Image& ref, const Image& target, const PhoOrder& order, const std::vector<WarpPlan>& plans)
        : ref_(ref), target_(target), order_(order), plans_(plans) {
        for (auto& s : stages_) s = Image(ref.height(), ref.width(), ref.channels());
        for (auto& s : scratch_) s = Image(ref.height(), ref.width(), ref.channels());
    }

    double anchor(const Vec& theta) {
        const std::size_t from = valid_ ? first_change(theta) : 0;
        if (valid_ && from == 4) return anchor_loss_;
        anchor_ = theta;
        valid_ = false;
        for (std::size_t k = from; k < 4; ++k) {
            stages_[k] = k == 0 ? ref_ : stages_[k - 1];
            adjust_in_place(stages_[k], order_[k], theta[pho_param_slot(order_[k])]);
        }
        anchor_loss_ = finish(stages_[3]);
        valid_ = true;
        return anchor_loss_;
    }

    double operator()(const Vec& theta) {
        const std::size_t from = valid_ ? first_change(theta) : 0;
        if (valid_ && from == 4) return anchor_loss_;
        Image& work = scratch_[0];
        work = from == 0 ? ref_ : stages_[from - 1];
        for (std::size_t k = from; k < 4; ++k) {
            adjust_in_place(work, order_[k], theta[pho_param_slot(order_[k])]);
        }
        return finish(work);
    }

private:
    // Applies the warp plans, alternating between scratch_[1] and scratch_[2]
    // (the input is never one of those), and scores the result.
    double finish(const Image& adjusted) {
        const Image* cur = &adjusted;
        std::size_t next = 1;
        for (const WarpPlan& plan : plans_) {
            plan.apply(*cur, scratch_[next]);
            cur = &scratch_[next];
            next = 3 - next;
        }
        return mean_abs(*cur, target_);
    }

    std::size_t first_change(const Vec& theta) const noexcept {
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t slot = pho_param_slot(order_[k]);
            if (theta[slot] != anchor_[slot]) return k;
        }
        return 4;
    }

    const Image& ref_;
    const Image& target_;
    PhoOrder order_;
    const std::vector<WarpPlan>& plans_;
    std::array<Image, 4> stages_;
    std::array<Image, 3> scratch_;
    Vec anchor_{};
    double anchor_loss_ = kInf;
    bool valid_ = false;
};

template <std::size_t N>
struct Run {
    std::array<double, N> params{};
    double loss = kInf;
    std::vector<double> trace;
};

// Search space of one class: projection box, identity values and the
// finite-difference step.
template <std::size_t N>
struct Space {
    std::array<Range, N> box;
    std::array<double, N> defaults;
    double fd_step;
};

template <std::size_t N>
struct DescentPlan {
    int iterations;
    double step;
    std::array<bool, N> frozen{};  // frozen parameters keep their start value
};

// Objective level driving the descent direction at iteration `it`: the
// coarsest level first, then each finer one, full resolution for the last
// 15% of the iterations.
std::size_t level_for(int it, int iterations, std::size_t levels) noexcept {
    if (levels <= 1) return 0;
    const double coarse_span = 0.85 * iterations;
    if (it >= coarse_span) return 0;
    const auto k = static_cast<std::size_t>(it * static_cast<double>(levels - 1) / coarse_span);
    return levels - 1 - std::min(k, levels - 2);
}

// Projected sign descent. ladder[0] is the full-resolution objective and the
// only one whose losses are tracked; coarser entries (if any) only supply
// descent directions early on. Steps are measured in units of each
// parameter's box half-width.
template <std::size_t N, typename Obj>
Run<N> descend(std::vector<Obj>& ladder, std::array<double, N> theta, const DescentPlan<N>& plan,
               const Space<N>& space) {
    Run<N> run;
    run.params = theta;
    run.trace.reserve(static_cast<std::size_t>(plan.iterations));
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < N; ++i) {
        if (!plan.frozen[i]) free.push_back(i);
    }
    const std::vector<double> steps(free.size(), space.fd_step);
    std::vector<double> x(free.size());
    const auto abort_run = [&run] {
        run.loss = kInf;
        return run;
    };
    Obj& full = ladder.front();
    try {
        for (int it = 0; it < plan.iterations; ++it) {
            Obj& level = ladder[level_for(it, plan.iterations, ladder.size())];
            // Coarse iterates are not scored at full resolution (except the
            // start), so their trace entries repeat the best-so-far value.
            if (it == 0 || &level == &full || it + 1 == plan.iterations) {
                const double loss = full.anchor(theta);
                if (!std::isfinite(loss)) return abort_run();
                if (loss < run.loss) {
                    run.loss = loss;
                    run.params = theta;
                }
            }
            run.trace.push_back(run.loss);
            if (run.loss == 0.0 || free.empty() || it + 1 == plan.iterations) break;

            if (&level != &full && !std::isfinite(level.anchor(theta))) return abort_run();
            const Objective f = [&](std::span<const double> reduced) {
                std::array<double, N> v = theta;
                for (std::size_t j = 0; j < free.size(); ++j) v[free[j]] = reduced[j];
                return level(v);
            };
            for (std::size_t j = 0; j < free.size(); ++j) x[j] = theta[free[j]];
            const std::vector<double> g = fd_gradient(f, x, steps);
            const double rate = plan.step * 0.5 * (1.0 + std::cos(std::numbers::pi * it / plan.iterations));
            for (std::size_t j = 0; j < free.size(); ++j) {
                if (!std::isfinite(g[j])) return abort_run();
                const std::size_t i = free[j];
                const double half_width = 0.5 * (space.box[i].hi - space.box[i].lo);
                theta[i] = space.box[i].clamp(theta[i] - rate * half_width * g[j] / (std::abs(g[j]) + 1e-8));
            }
        }
        // Identity snapping: parameters that are inactive in the true chain
        // only ever pick up descent jitter, so try resetting each one to its
        // identity value and keep the reset whenever the loss does not rise.
        for (std::size_t i : free) {
            if (run.loss == 0.0) break;
            if (run.params[i] == space.defaults[i] || !space.box[i].contains(space.defaults[i])) continue;
            std::array<double, N> candidate = run.params;
            candidate[i] = space.defaults[i];
            const double loss = full.anchor(candidate);
            if (std::isfinite(loss) && loss <= run.loss) {
                run.loss = loss;
                run.params = candidate;
            }
        }
    } catch (const Error&) {
        return abort_run();
    }
    return run;
}

template <std::size_t N>
std::array<double, N> random_start(const std::array<Range, N>& box, std::uint64_t seed) {
    Rng rng(seed);
    std::array<double, N> theta{};
    for (std::size_t i = 0; i < N; ++i) theta[i] = uniform(rng, box[i].lo, box[i].hi);
    return theta;
}

// Descent from the identity, plus cfg.restarts - 1 runs from random box
// points; the lowest loss wins (earliest run on ties).
template <std::size_t N, typename Obj>
Run<N> optimize_runs(std::vector<Obj>& ladder, const Space<N>& space, std::uint64_t stream, const ReasonConfig& cfg) {
    Run<N> best;
    const DescentPlan<N> plan{cfg.max_iter, cfg.step, {}};
    for (int r = 0; r < cfg.restarts; ++r) {
        std::array<double, N> start = space.defaults;
        if (r > 0) start = random_start(space.box, mix_seed(cfg.seed, stream * 64 + static_cast<std::uint64_t>(r)));
        Run<N> run = descend(ladder, start, plan, space);
        if (r == 0 || run.loss < best.loss) best = std::move(run);
    }
    return best;
}

// Parsimony pass over a class winner. Operators are visited from the one
// closest to identity (in box half-widths) to the farthest; each is reset to
// identity and the remaining free parameters are re-descended. The simpler
// hypothesis is kept whenever its loss does not exceed the current one, and
// accepted resets stay frozen. This separates near-equivalent explanations
// such as a rotation versus an opposite shear pair with a compensating scale.
template <std::size_t N, typename Obj>
Run<N> prune(std::vector<Obj>& ladder, Run<N> best, const std::vector<std::vector<std::size_t>>& op_slots,
             const Space<N>& space, const ReasonConfig& cfg) {
    if (cfg.prune_iter < 1 || !std::isfinite(best.loss) || best.loss == 0.0) return best;
    const auto deviation = [&](const std::vector<std::size_t>& slots) {
        double d = 0.0;
        for (std::size_t i : slots) {
            const double half_width = 0.5 * (space.box[i].hi - space.box[i].lo);
            const double diff = std::abs(best.params[i] - space.defaults[i]);
            d = std::max(d, half_width > 0.0 ? diff / half_width : diff);
        }
        return d;
    };
    std::array<bool, N> frozen{};
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t k = 0; k < op_slots.size(); ++k) {
        const double d = deviation(op_slots[k]);
        if (d == 0.0) {
            for (std::size_t i : op_slots[k]) frozen[i] = true;
        } else {
            candidates.emplace_back(d, k);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [dev, k] : candidates) {
        if (best.loss == 0.0) break;
        DescentPlan<N> plan{cfg.prune_iter, cfg.step, frozen};
        std::array<double, N> start = best.params;
        for (std::size_t i : op_slots[k]) {
            start[i] = space.defaults[i];
            plan.frozen[i] = true;
        }
        Run<N> run = descend(ladder, start, plan, space);
        if (run.loss <= best.loss) {
            for (double v : run.trace) best.trace.push_back(std::min(v, best.loss));
            best.loss = run.loss;
            best.params = run.params;
            frozen = plan.frozen;
        }
    }
    return best;
}

void require_pair(const Image& ref, const Image& target, int channels, const char* what) {
    require_channels(ref, channels, what);
    if (!ref.same_shape(target)) throw DimensionError(std::string(what) + ": reference and target shapes differ");
}

// 2x2 box average (odd trailing rows/columns are dropped). Pixel centres
// keep their relation to the image centre, so recentred matrices built for
// the smaller extent act consistently.
Image downsample2(const Image& img) {
    const int h = img.height() / 2;
    const int w = img.width() / 2;
    const int c = img.channels();
    Image out(h, w, c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                const double sum = static_cast<double>(img.at(2 * y, 2 * x, ch)) + img.at(2 * y, 2 * x + 1, ch) +
                                   img.at(2 * y + 1, 2 * x, ch) + img.at(2 * y + 1, 2 * x + 1, ch);
                out.at(y, x, ch) = static_cast<float>(0.25 * sum);
            }
        }
    }
    return out;
}

// Reference/target pairs from full resolution down; a level is only added
// while both sides stay at least 16 pixels.
struct Pyramid {
    std::vector<Image> ref;
    std::vector<Image> target;
};

Pyramid build_pyramid(const Image& ref, const Image& target, int levels) {
    Pyramid p;
    p.ref.push_back(ref);
    p.target.push_back(target);
    while (static_cast<int>(p.ref.size()) < levels && p.ref.back().height() >= 32 && p.ref.back().width() >= 32) {
        p.ref.push_back(downsample2(p.ref.back()));
        p.target.push_back(downsample2(p.target.back()));
    }
    return p;
}

Space<GeoParams::kSize> geo_space(const ReasonConfig& cfg) {
    return {cfg.ranges.geo_box(), GeoParams{}.to_array(), cfg.fd_step_geo};
}

Space<PhoParams::kSize> pho_space(const ReasonConfig& cfg) {
    return {cfg.ranges.pho_box(), PhoParams{}.to_array(), cfg.fd_step_pho};
}

std::vector<GeoObjective> geo_ladder(const Pyramid& pyr, const GeoOrder& order) {
    std::vector<GeoObjective> ladder;
    ladder.reserve(pyr.ref.size());
    for (std::size_t l = 0; l < pyr.ref.size(); ++l) ladder.emplace_back(pyr.ref[l], pyr.target[l], order);
    return ladder;
}

GeoResult optimize_geo_pyramid(const Pyramid& pyr, const GeoOrder& order, const ReasonConfig& cfg) {
    auto ladder = geo_ladder(pyr, order);
    const auto run = optimize_runs(ladder, geo_space(cfg), order_code(order), cfg);
    return {order, GeoParams::from_array(run.params), run.loss, run.trace};
}

std::vector<WarpPlan> geometric_plans(const GeoResult& geo, int height, int width) {
    std::vector<WarpPlan> plans;
    geo.params.validate();
    for (GeoOp op : geo.order) {
        const AffineMatrix m = recenter(inverse_affine(op, geo.params, width, height), width, height);
        if (!m.is_identity()) plans.emplace_back(m, height, width);
    }
    return plans;
}

// Photometric pyramid: the estimated geometric block is planned once per
// level, since its recentred matrices depend on the extent.
struct PhoPyramid {
    Pyramid images;
    std::vector<std::vector<WarpPlan>> plans;
};

PhoPyramid build_pho_pyramid(const Image& ref, const Image& target, const GeoResult& geo, int levels) {
    PhoPyramid p{build_pyramid(ref, target, levels), {}};
    for (const Image& level : p.images.ref) p.plans.push_back(geometric_plans(geo, level.height(), level.width()));
    return p;
}

std::vector<PhoObjective> pho_ladder(const PhoPyramid& pyr, const PhoOrder& order) {
    std::vector<PhoObjective> ladder;
    ladder.reserve(pyr.plans.size());
    for (std::size_t l = 0; l < pyr.plans.size(); ++l) {
        ladder.emplace_back(pyr.images.ref[l], pyr.images.target[l], order, pyr.plans[l]);
    }
    return ladder;
}

PhoResult optimize_pho_pyramid(const PhoPyramid& pyr, const PhoOrder& order, const ReasonConfig& cfg) {
    auto ladder = pho_ladder(pyr, order);
    const auto run = optimize_runs(ladder, pho_space(cfg), 0x1000 + order_code(order), cfg);
    return {order, PhoParams::from_array(run.params), run.loss, run.trace};
}

template <typename Result>
Run<Result::Params::kSize> as_run(const Result& r) {
    return {r.params.to_array(), r.loss, r.trace};
}

// Lowest loss wins; candidates arrive in lexicographic order, so a strict
// comparison keeps the earliest ordering on ties.
template <typename Result>
Result pick_best(std::vector<Result>& results) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].loss < results[best].loss) best = i;
    }
    return std::move(results[best]);
}

void require_compatible(const WatermarkBundle& observed, const WatermarkBundle& refs) {
    observed.validate();
    refs.validate();
    if (!observed.sem.same_extent(refs.sem)) {
        throw DimensionError("observed and reference watermarks differ in extent");
    }
}

}  // namespace

void ReasonConfig::validate() const {
    if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
    if (restarts < 1) throw ParameterError("restarts must be >= 1");
    if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("step must be > 0");
    if (!(fd_step_geo > 0.0) || !(fd_step_pho > 0.0) || !std::isfinite(fd_step_geo) || !std::isfinite(fd_step_pho)) {
        throw ParameterError("finite-difference steps must be > 0");
    }
    if (prune_iter < 0) throw ParameterError("prune_iter must be >= 0");
    if (pyramid_levels < 1) throw ParameterError("pyramid_levels must be >= 1");
    if (!(mask_threshold > 0.0 && mask_threshold < 1.0)) throw ParameterError("mask threshold must lie in (0, 1)");
    ranges.validate();
}

std::vector<double> fd_gradient(const Objective& objective, std::span<const double> x, std::span<const double> steps) {
    if (x.size() != steps.size()) throw ParameterError("fd_gradient: one step per parameter is required");
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = steps[i];
        if (!(h > 0.0)) throw ParameterError("fd_gradient: steps must be positive");
        probe[i] = x[i] + h;
        const double up = objective(probe);
        probe[i] = x[i] - h;
        const double down = objective(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

Image render_geo(const Image& ref, const GeoOrder& order, const GeoParams& params) {
    return apply_geometric(ref, order, params);
}

Image render_pho(const Image& ref, const PhoOrder& order, const PhoParams& params, const GeoResult& geo) {
    return apply_geometric(apply_photometric(ref, order, params), geo.order, geo.params);
}

GeoResult optimize_geometric(const Image& ref, const Image& target, const GeoOrder& order, const ReasonConfig& cfg) {
    cfg.validate();
    require_pair(ref, target, ref.channels(), "geometric reasoning");
    return optimize_geo_pyramid(build_pyramid(ref, target, cfg.pyramid_levels), order, cfg);
}

PhoResult optimize_photometric(const Image& ref, const Image& target, const PhoOrder& order, const GeoResult& geo,
                               const ReasonConfig& cfg) {
    cfg.validate();
    require_pair(ref, target, ref.channels(), "photometric reasoning");
    return optimize_pho_pyramid(build_pho_pyramid(ref, target, geo, cfg.pyramid_levels), order, cfg);
}

GeoResult reason_geometric(const WatermarkBundle& observed, const WatermarkBundle& refs, const ReasonConfig& cfg) {
    cfg.validate();
    require_compatible(observed, refs);
    const Pyramid pyr = build_pyramid(refs.geo, observed.geo, cfg.pyramid_levels);
    const auto orders = GeoOrder::all();
    std::vector<GeoResult> results(orders.size());
    parallel_for(orders.size(), cfg.threads,
                 [&](std::size_t i) { results[i] = optimize_geo_pyramid(pyr, orders[i], cfg); });
    GeoResult best = pick_best(results);

    std::vector<std::vector<std::size_t>> op_slots;
    for (GeoOp op : best.order) {
        const auto slots = geo_param_slots(op);
        op_slots.emplace_back(slots.begin(), slots.end());
    }
    auto ladder = geo_ladder(pyr, best.order);
    const auto pruned = prune(ladder, as_run(best), op_slots, geo_space(cfg), cfg);
    return {best.order, GeoParams::from_array(pruned.params), pruned.loss, pruned.trace};
}

PhoResult reason_photometric(const WatermarkBundle& observed, const WatermarkBundle& refs, const GeoResult& geo,
                             const ReasonConfig& cfg) {
    cfg.validate();
    require_compatible(observed, refs);
    const PhoPyramid pyr = build_pho_pyramid(refs.pho, observed.pho, geo, cfg.pyramid_levels);
    const auto orders = PhoOrder::all();
    std::vector<PhoResult> results(orders.size());
    parallel_for(orders.size(), cfg.threads,
                 [&](std::size_t i) { results[i] = optimize_pho_pyramid(pyr, orders[i], cfg); });
    PhoResult best = pick_best(results);

    std::vector<std::vector<std::size_t>> op_slots;
    for (PhoOp op : best.order) op_slots.push_back({pho_param_slot(op)});
    auto ladder = pho_ladder(pyr, best.order);
    const auto pruned = prune(ladder, as_run(best), op_slots, pho_space(cfg), cfg);
    return {best.order, PhoParams::from_array(pruned.params), pruned.loss, pruned.trace};
}

SemanticEstimate reason_semantic(const WatermarkBundle& observed, double threshold) {
    require_channels(observed.sem, 1, "semantic watermark");
    return {observed.sem, binarize(observed.sem, threshold)};
}

ChainHypothesis reason_chain(const WatermarkBundle& observed, const WatermarkBundle& refs, const ReasonConfig& cfg) {
    ChainHypothesis h;
    h.geometric = reason_geometric(observed, refs, cfg);
    h.photometric = reason_photometric(observed, refs, h.geometric, cfg);
    auto sem = reason_semantic(observed, cfg.mask_threshold);
    h.semantic_mask = std::move(sem.mask);
    h.binarized_mask = std::move(sem.binarized);
    return h;
}

}  // namespace telltale
