#ifndef UNIDEX_GLP_HPP
#define UNIDEX_GLP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "unidex/design_types.hpp"
#include "unidex/error.hpp"
#include "unidex/random.hpp"

namespace unidex::design {

/// Hickernell's centered L2 discrepancy of points in [0,1]^d.
inline double centered_l2_discrepancy(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    const auto d = x.cols();
    const Eigen::MatrixXd dev = (x.array() - 0.5).abs().matrix();
    double single = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double prod = 1.0;
        for (Eigen::Index k = 0; k < d; ++k) prod *= 1.0 + 0.5 * dev(i, k) - 0.5 * dev(i, k) * dev(i, k);
        single += prod;
    }
    double pair = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double prod = 1.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                prod *= 1.0 + 0.5 * dev(i, k) + 0.5 * dev(j, k) - 0.5 * std::abs(x(i, k) - x(j, k));
            }
            pair += prod;
        }
    }
    const double nn = static_cast<double>(n);
    const double sq = std::pow(13.0 / 12.0, static_cast<double>(d)) - 2.0 / nn * single + pair / (nn * nn);
    return std::sqrt(std::max(0.0, sq));
}

/// First `rows` points of the centered rank-1 lattice with the given modulus
/// and generating vector: u_ik = ((i * h_k mod modulus) + 0.5) / modulus.
inline Eigen::MatrixXd rank1_lattice(std::size_t modulus, const std::vector<std::size_t>& generator, std::size_t rows) {
    Eigen::MatrixXd u(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(generator.size()));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < generator.size(); ++k) {
            const std::size_t r = (i * generator[k]) % modulus;
            u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                (static_cast<double>(r) + 0.5) / static_cast<double>(modulus);
        }
    }
    return u;
}

/// Korobov generating vector (1, a, a^2, ..., a^(d-1)) mod modulus.
inline std::vector<std::size_t> korobov_generator(std::size_t modulus, std::size_t a, std::size_t d) {
    std::vector<std::size_t> h(d);
    std::size_t p = 1 % modulus;
    for (std::size_t k = 0; k < d; ++k) {
        h[k] = p;
        p = (p * a) % modulus;
    }
    return h;
}

namespace detail {

// Multipliers a in [2, modulus) coprime to the modulus whose first d Korobov
// powers are pairwise distinct (so no two columns coincide).
inline std::vector<std::size_t> korobov_candidates(std::size_t modulus, std::size_t d) {
    std::vector<std::size_t> out;
    if (d == 1) {
        out.push_back(1);
        return out;
    }
    for (std::size_t a = 2; a < modulus; ++a) {
        if (std::gcd(a, modulus) != 1) continue;
        const auto h = korobov_generator(modulus, a, d);
        if (std::set<std::size_t>(h.begin(), h.end()).size() == d) out.push_back(a);
    }
    return out;
}

}  // namespace detail

/// Good-lattice-point design: Korobov rank-1 lattice minimizing the centered
/// L2 discrepancy. Candidates are the N-point lattices and the first N points
/// of the (N+1)-point lattices; on ties the N-point lattice and then the
/// smallest multiplier win. If neither modulus admits a multiplier, the next
/// larger modulus that does is used.
inline HypercubeDesign glp_design(std::size_t n, std::size_t d) {
    if (n < 2) throw NumericError(NumericErrorKind::InvalidN, "N must be >= 2");
    if (d < 1) throw NumericError(NumericErrorKind::InvalidN, "d must be >= 1");
    HypercubeDesign best;
    double best_cd = std::numeric_limits<double>::infinity();
    for (std::size_t modulus = n;; ++modulus) {
        for (std::size_t a : detail::korobov_candidates(modulus, d)) {
            const auto h = korobov_generator(modulus, a, d);
            Eigen::MatrixXd u = rank1_lattice(modulus, h, n);
            const double cd = centered_l2_discrepancy(u);
            // Mirror-image lattices tie exactly; rounding must not break the tie.
            if (cd < best_cd * (1.0 - 1e-12)) {
                best_cd = cd;
                best.points = std::move(u);
                best.generator = h;
                best.lattice_size = modulus;
            }
        }
        if (modulus >= n + 1 && best.lattice_size != 0) return best;
    }
}

/// Korobov P_2 figure of merit (worst-case error for periodic Sobolev
/// integrands of smoothness 2). O(modulus * d).
inline double korobov_p2(std::size_t modulus, std::size_t a, std::size_t d) {
    const auto h = korobov_generator(modulus, a, d);
    const double c = 2.0 * std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (std::size_t i = 0; i < modulus; ++i) {
        double prod = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double x = static_cast<double>((i * h[k]) % modulus) / static_cast<double>(modulus);
            prod *= 1.0 + c * (x * x - x + 1.0 / 6.0);
        }
        sum += prod;
    }
    return sum / static_cast<double>(modulus) - 1.0;
}

/// Randomly shifted rank-1 lattice of m points in [0,1)^d. Every point is
/// marginally uniform; the set as a whole is far more even than i.i.d. draws.
/// The multiplier is the P_2 minimizer over at most `max_candidates` evenly
/// spaced coprime values.
inline Eigen::MatrixXd shifted_lattice(std::size_t m, std::size_t d, std::uint64_t seed,
                                       std::size_t max_candidates = 128) {
    if (m < 1) throw NumericError(NumericErrorKind::InvalidN, "lattice needs at least one point");
    std::size_t best = 1;
    if (d > 1 && m > 2) {
        std::vector<std::size_t> coprime;
        for (std::size_t a = 2; a <= m / 2; ++a) {
            if (std::gcd(a, m) == 1) coprime.push_back(a);
        }
        const std::size_t step = std::max<std::size_t>(1, coprime.size() / max_candidates);
        double best_p2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < coprime.size(); i += step) {
            const double v = korobov_p2(m, coprime[i], d);
            if (v < best_p2) {
                best_p2 = v;
                best = coprime[i];
            }
        }
    }
    const auto h = korobov_generator(m, best, d);
    Rng rng(seed);
    std::vector<double> shift(d);
    for (auto& s : shift) s = rng.uniform();
    Eigen::MatrixXd u(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double v = static_cast<double>((i * h[k]) % m) / static_cast<double>(m) + shift[k];
            u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v - std::floor(v);
        }
    }
    return u;
}

}  // namespace unidex::design

#endif  // UNIDEX_GLP_HPP
