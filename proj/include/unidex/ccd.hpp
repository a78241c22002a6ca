#ifndef UNIDEX_CCD_HPP
#define UNIDEX_CCD_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "unidex/error.hpp"
#include "unidex/polytope.hpp"
#include "unidex/glp.hpp"
#include "unidex/random.hpp"
#include "unidex/rosenblatt.hpp"

namespace unidex::design {

/// Scoring configuration for the central composite discrepancy.
struct MCConfig {
    std::size_t centers = 4096;  // M: partition centers z drawn from the domain
    std::size_t pool = 20000;    // P: uniform points estimating orthant volume fractions
    std::uint64_t seed = 0;
    bool exact = false;          // closed form; box domains only
};

/// Closed-form CCD for a design on an axis-aligned box. With points mapped to
/// the unit cube,
///   CCD^2 = 2^-d [ N^-2 sum_{i,l} prod_j (1 - |p_ij - p_lj|)
///                  - 2 N^-1 sum_i prod_j (1/2 + p_ij - p_ij^2) + (2/3)^d ].
inline double ccd_exact_box(std::span<const geom::Interval> box, const Eigen::MatrixXd& points) {
    const auto n = points.rows();
    const auto d = points.cols();
    if (static_cast<std::size_t>(d) != box.size()) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch, "design and box dimensions differ");
    }
    Eigen::MatrixXd p(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& iv = box[static_cast<std::size_t>(j)];
        p.col(j) = ((points.col(j).array() - iv.lo) / iv.width()).matrix();
    }
    double pair = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index l = 0; l < n; ++l) {
            double prod = 1.0;
            for (Eigen::Index j = 0; j < d; ++j) prod *= 1.0 - std::abs(p(i, j) - p(l, j));
            pair += prod;
        }
    }
    double single = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double prod = 1.0;
        for (Eigen::Index j = 0; j < d; ++j) prod *= 0.5 + p(i, j) - p(i, j) * p(i, j);
        single += prod;
    }
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    const double sq = std::pow(0.5, dd) * (pair / (nn * nn) - 2.0 * single / nn + std::pow(2.0 / 3.0, dd));
    return std::sqrt(std::max(0.0, sq));
}

/// Reusable CCD estimator for one domain.
///
/// Monte-Carlo mode draws M centers z and a pool of P points uniformly from
/// the domain as randomly shifted lattices pushed through the inverse
/// Rosenblatt map. For each center the 2^d orthants anchored at z
/// get volume fractions from the pool once; a design is then scored by
///   CCD^2 ~= mean_z 2^-d sum_k (count_k(z) / N - frac_k(z))^2.
/// Orthant k holds points with x_j >= z_j exactly for the set bits j of k.
class CcdScorer {
public:
    CcdScorer(const geom::Polytope& domain, const MCConfig& cfg) : cfg_(cfg), d_(domain.dim()) {
        if (cfg.exact) {
            if (!domain.is_box()) {
                throw GeometryError(GeometryErrorKind::NotABox, "exact CCD requires an axis-aligned box domain");
            }
            box_ = domain.bounds();
            return;
        }
        if (cfg.centers == 0 || cfg.pool == 0) {
            throw NumericError(NumericErrorKind::InvalidN, "Monte-Carlo CCD needs positive center and pool counts");
        }
        if (d_ > 16) {
            throw GeometryError(GeometryErrorKind::DimensionMismatch, "CCD supports at most 16 dimensions");
        }
        const std::size_t orthants = std::size_t{1} << d_;
        const auto order = scene::ConditioningOrder::identity(d_);
        centers_ = inverse_rosenblatt(domain, shifted_lattice(cfg.centers, d_, derive_seed(cfg.seed, 0)), order);
        const Eigen::MatrixXd pool =
            inverse_rosenblatt(domain, shifted_lattice(cfg.pool, d_, derive_seed(cfg.seed, 1)), order);
        // Row-major copy for the inner classification loop.
        std::vector<double> flat(pool.size());
        for (Eigen::Index i = 0; i < pool.rows(); ++i) {
            for (Eigen::Index j = 0; j < pool.cols(); ++j) flat[static_cast<std::size_t>(i) * d_ + static_cast<std::size_t>(j)] = pool(i, j);
        }
        fractions_.assign(cfg.centers * orthants, 0.0);
        std::vector<std::size_t> counts(orthants);
        std::vector<double> z(d_);
        for (std::size_t c = 0; c < cfg.centers; ++c) {
            for (std::size_t j = 0; j < d_; ++j) z[j] = centers_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < cfg.pool; ++i) {
                const double* x = &flat[i * d_];
                std::size_t k = 0;
                for (std::size_t j = 0; j < d_; ++j) k |= static_cast<std::size_t>(x[j] >= z[j]) << j;
                ++counts[k];
            }
            for (std::size_t k = 0; k < orthants; ++k) {
                fractions_[c * orthants + k] = static_cast<double>(counts[k]) / static_cast<double>(cfg.pool);
            }
        }
    }

    double score(const Eigen::MatrixXd& points) const {
        if (static_cast<std::size_t>(points.cols()) != d_) {
            throw GeometryError(GeometryErrorKind::DimensionMismatch, "design and domain dimensions differ");
        }
        if (points.rows() == 0) throw NumericError(NumericErrorKind::InvalidN, "cannot score an empty design");
        if (cfg_.exact) return ccd_exact_box(box_, points);
        const std::size_t orthants = std::size_t{1} << d_;
        const double n = static_cast<double>(points.rows());
        std::vector<std::size_t> counts(orthants);
        double acc = 0.0;
        for (std::size_t c = 0; c < cfg_.centers; ++c) {
            std::fill(counts.begin(), counts.end(), 0);
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
                std::size_t k = 0;
                for (std::size_t j = 0; j < d_; ++j) {
                    k |= static_cast<std::size_t>(points(i, static_cast<Eigen::Index>(j)) >=
                                                  centers_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)))
                         << j;
                }
                ++counts[k];
            }
            double sum = 0.0;
            for (std::size_t k = 0; k < orthants; ++k) {
                const double dev = static_cast<double>(counts[k]) / n - fractions_[c * orthants + k];
                sum += dev * dev;
            }
            acc += sum;
        }
        return std::sqrt(acc / static_cast<double>(cfg_.centers) / static_cast<double>(orthants));
    }

    const MCConfig& config() const { return cfg_; }

private:
    MCConfig cfg_;
    std::size_t d_;
    std::vector<geom::Interval> box_;
    Eigen::MatrixXd centers_;
    std::vector<double> fractions_;
};

/// One-shot CCD of `design` over `domain`.
inline double ccd(const geom::Polytope& domain, const Eigen::MatrixXd& design, const MCConfig& cfg) {
    return CcdScorer(domain, cfg).score(design);
}

}  // namespace unidex::design

#endif  // UNIDEX_CCD_HPP
