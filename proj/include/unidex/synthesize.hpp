#ifndef UNIDEX_SYNTHESIZE_HPP
#define UNIDEX_SYNTHESIZE_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unidex/ccd.hpp"
#include "unidex/design_types.hpp"
#include "unidex/error.hpp"
#include "unidex/glp.hpp"
#include "unidex/random.hpp"
#include "unidex/rosenblatt.hpp"
#include "unidex/sampler.hpp"
#include "unidex/scene_model.hpp"
#include "unidex/spec_parser.hpp"

namespace unidex {

struct SynthesisConfig {
    std::uint64_t seed = 0;
    std::size_t order_cap = 720;
    std::size_t mc_centers = 4096;
    std::size_t mc_pool = 20000;
    bool exact_ccd = false;
    sampling::HitAndRunConfig sampler{};
    scene::ClassTable classes = scene::ClassTable::defaults();

    design::MCConfig mc() const { return {mc_centers, mc_pool, seed, exact_ccd}; }
};

/// Wall-clock milliseconds per pipeline stage.
struct StageTimings {
    double parse = 0.0;
    double geometry = 0.0;  // scene graph, joint domain, order enumeration
    double glp = 0.0;
    double transforms = 0.0;
    double ccd = 0.0;  // includes building the scorer
    double total() const { return parse + geometry + glp + transforms + ccd; }
};

struct OrderScore {
    scene::ConditioningOrder order;
    double ccd = 0.0;
};

struct SynthesisResult {
    design::Design design;
    std::vector<OrderScore> per_order;  // in evaluation (lexicographic) order
    std::size_t viable_order_count = 0;  // before the cap
    std::size_t lattice_size = 0;
    std::vector<std::size_t> generator;
    StageTimings timings;

    std::size_t orders_evaluated() const { return per_order.size(); }
};

namespace detail {

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error&) {
        rethrow_with_context(stage);
    }
}

// Number of linear extensions, counted by subset DP; saturates at `limit`.
inline std::size_t count_orders(const scene::SceneGraph& g, std::size_t limit) {
    const std::size_t d = g.dim();
    if (d > 20) return limit;
    const auto pred = g.dim_predecessors();
    std::vector<std::size_t> mask(d, 0);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t p : pred[k]) mask[k] |= std::size_t{1} << p;
    }
    std::vector<std::size_t> ways(std::size_t{1} << d, 0);
    ways[0] = 1;
    for (std::size_t s = 0; s < ways.size(); ++s) {
        if (ways[s] == 0) continue;
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t bit = std::size_t{1} << k;
            if ((s & bit) || (mask[k] & ~s)) continue;
            ways[s | bit] = std::min(limit, ways[s | bit] + ways[s]);
        }
    }
    return ways.back();
}

}  // namespace detail

/// Parsed scene, joint domain, viable orders and CCD scorer for one spec,
/// built once and reused across design sizes.
class Pipeline {
public:
    Pipeline(std::string_view source, SynthesisConfig cfg) : cfg_(std::move(cfg)) {
        detail::Stopwatch sw;
        spec_ = detail::in_stage("parse", [&] { return dsl::parse(source); });
        setup_.parse = sw.lap();
        detail::in_stage("geometry", [&] {
            graph_ = scene::build_scene_graph(spec_, cfg_.classes);
            domain_.emplace(scene::assemble_joint_domain(graph_));
            orders_ = scene::viable_orders(graph_, cfg_.order_cap, derive_seed(cfg_.seed, 2));
            viable_count_ = detail::count_orders(graph_, std::size_t{1} << 62);
            return 0;
        });
        setup_.geometry = sw.lap();
        scorer_.emplace(detail::in_stage("ccd", [&] { return design::CcdScorer(domain_->polytope, cfg_.mc()); }));
        setup_.ccd = sw.lap();
    }

    /// GLP design pushed through every viable order; the order
    /// with the lowest CCD wins, ties going to the earliest order.
    SynthesisResult synthesize(std::size_t n) const {
        if (n < 2) throw NumericError(NumericErrorKind::InvalidN, "N must be ≥ 2");
        SynthesisResult out;
        out.timings = setup_;
        out.viable_order_count = viable_count_;
        detail::Stopwatch sw;
        const auto hd = detail::in_stage("glp", [&] { return design::glp_design(n, domain_->dim()); });
        out.timings.glp = sw.lap();
        out.lattice_size = hd.lattice_size;
        out.generator = hd.generator;

        std::optional<std::size_t> best;
        std::vector<design::Design> candidates;
        candidates.reserve(orders_.size());
        for (const auto& order : orders_) {
            sw.lap();
            auto d = detail::in_stage("transforms", [&] { return design::inverse_rosenblatt(*domain_, graph_, hd, order); });
            out.timings.transforms += sw.lap();
            d.ccd_score = detail::in_stage("ccd", [&] { return scorer_->score(d.points); });
            out.timings.ccd += sw.lap();
            out.per_order.push_back({order, d.ccd_score});
            if (!best || d.ccd_score < out.per_order[*best].ccd) best = candidates.size();
            candidates.push_back(std::move(d));
        }
        out.design = std::move(candidates[*best]);
        return out;
    }

    /// Baseline: hit-and-run sample of the scene, scored with the same scorer.
    design::Design random_design(std::size_t n, std::uint64_t seed) const {
        auto d = detail::in_stage("sampling", [&] { return sampling::sample_scene(graph_, n, seed, cfg_.sampler); });
        d.ccd_score = detail::in_stage("ccd", [&] { return scorer_->score(d.points); });
        return d;
    }

    double score(const Eigen::MatrixXd& points) const {
        return detail::in_stage("ccd", [&] { return scorer_->score(points); });
    }

    const SynthesisConfig& config() const { return cfg_; }
    const dsl::SceneSpec& spec() const { return spec_; }
    const scene::SceneGraph& graph() const { return graph_; }
    const scene::JointDomain& domain() const { return *domain_; }
    const std::vector<scene::ConditioningOrder>& orders() const { return orders_; }
    const StageTimings& setup_timings() const { return setup_; }

private:
    SynthesisConfig cfg_;
    dsl::SceneSpec spec_;
    scene::SceneGraph graph_;
    std::optional<scene::JointDomain> domain_;
    std::vector<scene::ConditioningOrder> orders_;
    std::size_t viable_count_ = 0;
    std::optional<design::CcdScorer> scorer_;
    StageTimings setup_;
};

inline SynthesisResult synthesize_design(std::string_view source, std::size_t n, const SynthesisConfig& cfg = {}) {
    if (n < 2) throw NumericError(NumericErrorKind::InvalidN, "N must be ≥ 2");
    return Pipeline(source, cfg).synthesize(n);
}

}  // namespace unidex

#endif  // UNIDEX_SYNTHESIZE_HPP
