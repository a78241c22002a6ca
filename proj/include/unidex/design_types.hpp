#ifndef UNIDEX_DESIGN_TYPES_HPP
#define UNIDEX_DESIGN_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

#include "unidex/scene_model.hpp"

namespace unidex::design {

/// N x d points in [0, 1)^d.
struct HypercubeDesign {
    Eigen::MatrixXd points;
    std::size_t lattice_size = 0;             // rank-1 lattice modulus actually used
    std::vector<std::size_t> generator;       // per-column lattice multipliers

    std::size_t n() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t d() const { return static_cast<std::size_t>(points.cols()); }
};

/// N x d sample of the joint domain, one row per experiment.
struct Design {
    Eigen::MatrixXd points;
    std::vector<scene::DimMeta> dim_meta;
    scene::ConditioningOrder order_used;
    double ccd_score = std::numeric_limits<double>::quiet_NaN();

    std::size_t n() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t d() const { return static_cast<std::size_t>(points.cols()); }
};

}  // namespace unidex::design

#endif  // UNIDEX_DESIGN_TYPES_HPP
