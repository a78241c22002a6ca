#ifndef UNIDEX_SAMPLER_HPP
#define UNIDEX_SAMPLER_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

#include "unidex/design_types.hpp"
#include "unidex/polytope.hpp"
#include "unidex/random.hpp"
#include "unidex/scene_model.hpp"

namespace unidex::sampling {

struct HitAndRunConfig {
    std::size_t burn_in = 100;
    std::size_t thinning = 10;
};

namespace detail {

// Hit-and-run chain. Directions are drawn uniformly on the sphere in
// coordinates rescaled by the bounding box, which keeps the chain mixing on
// domains whose axes differ by orders of magnitude; the affine rescaling
// leaves the uniform target unchanged.
inline Eigen::MatrixXd run_chain(const geom::Polytope& p, std::size_t n, Rng& rng, const HitAndRunConfig& cfg) {
    const auto k = static_cast<Eigen::Index>(p.dim());
    Eigen::VectorXd scale(k);
    for (Eigen::Index j = 0; j < k; ++j) scale(j) = p.bounds()[static_cast<std::size_t>(j)].width();

    Eigen::VectorXd x = geom::chebyshev_center(p).center;
    Eigen::VectorXd slack = -(p.A() * x + p.b());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), k);
    Eigen::VectorXd dir(k);
    const std::size_t total = cfg.burn_in + n * std::max<std::size_t>(1, cfg.thinning);
    std::size_t emitted = 0;
    for (std::size_t step = 1; step <= total; ++step) {
        for (Eigen::Index j = 0; j < k; ++j) dir(j) = rng.normal();
        dir = dir.normalized().cwiseProduct(scale);
        const Eigen::VectorXd rate = p.A() * dir;
        double t_lo = -std::numeric_limits<double>::infinity();
        double t_hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < rate.size(); ++r) {
            const double s = std::max(0.0, slack(r));
            if (rate(r) > 1e-300) {
                t_hi = std::min(t_hi, s / rate(r));
            } else if (rate(r) < -1e-300) {
                t_lo = std::max(t_lo, s / rate(r));
            }
        }
        if (std::isfinite(t_lo) && std::isfinite(t_hi) && t_hi > t_lo) {
            const double t = rng.uniform(t_lo, t_hi);
            x += t * dir;
            slack -= t * rate;
        }
        if (step > cfg.burn_in && (step - cfg.burn_in) % std::max<std::size_t>(1, cfg.thinning) == 0) {
            out.row(static_cast<Eigen::Index>(emitted++)) = x.transpose();
        }
    }
    return out;
}

}  // namespace detail

/// n approximately uniform points from a bounded, non-empty polytope.
inline Eigen::MatrixXd hit_and_run(const geom::Polytope& p, std::size_t n, std::uint64_t seed,
                                   const HitAndRunConfig& cfg = {}) {
    Rng rng(seed);
    return detail::run_chain(p, n, rng, cfg);
}

/// Random-sampling baseline: per point, objects are sampled in dependency
/// order, each from its region instantiated with the realized parent values.
inline design::Design sample_scene(const scene::SceneGraph& g, std::size_t n, std::uint64_t seed,
                                   const HitAndRunConfig& cfg = {}) {
    if (g.dim() == 0) {
        throw GeometryError(GeometryErrorKind::NoFreeDimensions, "the scene has no free dimensions");
    }
    Rng rng(seed);
    design::Design out;
    out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g.dim()));
    out.dim_meta = g.free_dims;
    out.order_used = scene::ConditioningOrder::identity(g.dim());
    Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.dim()));
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& node : g.nodes) {
            if (node.dims.empty()) continue;
            const geom::Polytope region = node.region.instantiate(values);
            const Eigen::MatrixXd draw = detail::run_chain(region, 1, rng, {cfg.burn_in, 1});
            for (std::size_t j = 0; j < node.dims.size(); ++j) {
                values(static_cast<Eigen::Index>(node.dims[j])) = draw(0, static_cast<Eigen::Index>(j));
            }
        }
        out.points.row(static_cast<Eigen::Index>(i)) = values.transpose();
    }
    return out;
}

}  // namespace unidex::sampling

#endif  // UNIDEX_SAMPLER_HPP
