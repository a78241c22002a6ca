#ifndef UNIDEX_POLYTOPE_HPP
#define UNIDEX_POLYTOPE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unidex/error.hpp"
#include "unidex/lp.hpp"

namespace unidex::geom {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kZeroRowNorm = 1e-12;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
    double clamp(double v) const { return std::clamp(v, lo, hi); }
};

/// Bounded convex polytope in H-representation: { x in R^k : A x + b <= 0 }.
///
/// Rows are stored with unit-norm normals so that a row's residual is the
/// signed Euclidean distance to its hyperplane. Construction rejects empty
/// and unbounded sets and caches the exact axis bounds.
class Polytope {
public:
    Polytope(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
        if (A.rows() != b.size()) {
            throw GeometryError(GeometryErrorKind::DimensionMismatch,
                                "row count of A and length of b differ");
        }
        if (A.cols() < 1) {
            throw GeometryError(GeometryErrorKind::DimensionMismatch, "polytope needs at least one axis");
        }
        std::vector<Eigen::Index> keep;
        std::vector<double> norms;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const double norm = A.row(i).norm();
            if (!std::isfinite(norm) || !std::isfinite(b(i))) {
                throw NumericError(NumericErrorKind::NonFinite, "non-finite polytope coefficient");
            }
            if (norm < kZeroRowNorm) {
                if (b(i) > kFeasibilityTol) {
                    throw GeometryError(GeometryErrorKind::EmptyPolytope, "constant row is violated");
                }
                continue;
            }
            keep.push_back(i);
            norms.push_back(norm);
        }
        A_.resize(static_cast<Eigen::Index>(keep.size()), A.cols());
        b_.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t r = 0; r < keep.size(); ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            A_.row(ri) = A.row(keep[r]) / norms[r];
            b_(ri) = b(keep[r]) / norms[r];
        }
        compute_bounds();
    }

    /// Axis-aligned box from per-axis intervals.
    static Polytope box(std::span<const Interval> sides) {
        const auto k = static_cast<Eigen::Index>(sides.size());
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * k, k);
        Eigen::VectorXd b(2 * k);
        for (Eigen::Index j = 0; j < k; ++j) {
            A(2 * j, j) = 1.0;
            b(2 * j) = -sides[static_cast<std::size_t>(j)].hi;
            A(2 * j + 1, j) = -1.0;
            b(2 * j + 1) = sides[static_cast<std::size_t>(j)].lo;
        }
        return Polytope(A, b);
    }

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::VectorXd& b() const { return b_; }
    std::size_t dim() const { return static_cast<std::size_t>(A_.cols()); }
    std::size_t rows() const { return static_cast<std::size_t>(A_.rows()); }
    const std::vector<Interval>& bounds() const { return bounds_; }

    Eigen::VectorXd box_center() const {
        Eigen::VectorXd c(A_.cols());
        for (std::size_t j = 0; j < bounds_.size(); ++j) c(static_cast<Eigen::Index>(j)) = bounds_[j].midpoint();
        return c;
    }

    /// True when every row constrains a single axis.
    bool is_box() const {
        for (Eigen::Index i = 0; i < A_.rows(); ++i) {
            int nonzero = 0;
            for (Eigen::Index j = 0; j < A_.cols(); ++j) nonzero += std::abs(A_(i, j)) > 1e-14 ? 1 : 0;
            if (nonzero != 1) return false;
        }
        return true;
    }

private:
    void compute_bounds() {
        const Eigen::VectorXd h = -b_;
        bounds_.resize(dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            Eigen::VectorXd c = Eigen::VectorXd::Zero(A_.cols());
            c(static_cast<Eigen::Index>(j)) = 1.0;
            const auto hi = lp::maximize(c, A_, h);
            if (hi.status == lp::Status::Infeasible) {
                throw GeometryError(GeometryErrorKind::EmptyPolytope, "polytope is empty");
            }
            const auto lo = lp::maximize(-c, A_, h);
            if (hi.status == lp::Status::Unbounded || lo.status == lp::Status::Unbounded) {
                throw GeometryError(GeometryErrorKind::Unbounded, "axis " + std::to_string(j) + " is unbounded");
            }
            Interval iv{-lo.value, hi.value};
            if (iv.lo > iv.hi) iv.lo = iv.hi = iv.midpoint();
            bounds_[j] = iv;
        }
    }

    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    std::vector<Interval> bounds_;
};

inline void check_axis(const Polytope& p, std::size_t axis) {
    if (axis >= p.dim()) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch,
                            "axis " + std::to_string(axis) + " out of range for dimension " + std::to_string(p.dim()));
    }
}

inline Interval axis_bounds(const Polytope& p, std::size_t axis) {
    check_axis(p, axis);
    return p.bounds()[axis];
}

inline bool contains(const Polytope& p, const Eigen::VectorXd& x, double tol = kFeasibilityTol) {
    if (static_cast<std::size_t>(x.size()) != p.dim()) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch, "point dimension does not match polytope");
    }
    if (p.rows() == 0) return true;
    return (p.A() * x + p.b()).maxCoeff() <= tol;
}

/// Drop rows implied by the others (checked by LP, last row first).
inline Polytope prune_redundant(const Polytope& p) {
    const auto m = static_cast<Eigen::Index>(p.rows());
    std::vector<bool> active(static_cast<std::size_t>(m), true);
    for (Eigen::Index i = m - 1; i >= 0; --i) {
        Eigen::Index others = 0;
        for (Eigen::Index r = 0; r < m; ++r) others += (r != i && active[static_cast<std::size_t>(r)]) ? 1 : 0;
        Eigen::MatrixXd A(others, p.A().cols());
        Eigen::VectorXd h(others);
        Eigen::Index k = 0;
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r == i || !active[static_cast<std::size_t>(r)]) continue;
            A.row(k) = p.A().row(r);
            h(k) = -p.b()(r);
            ++k;
        }
        const auto res = lp::maximize(p.A().row(i).transpose(), A, h);
        if (res.status == lp::Status::Optimal && res.value + p.b()(i) <= kFeasibilityTol) {
            active[static_cast<std::size_t>(i)] = false;
        }
    }
    Eigen::Index kept = 0;
    for (bool a : active) kept += a ? 1 : 0;
    Eigen::MatrixXd A(kept, p.A().cols());
    Eigen::VectorXd b(kept);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (!active[static_cast<std::size_t>(r)]) continue;
        A.row(k) = p.A().row(r);
        b(k) = p.b()(r);
        ++k;
    }
    return Polytope(A, b);
}

/// Conjunction of two polytopes with redundant rows removed.
inline Polytope intersect(const Polytope& p, const Polytope& q) {
    if (p.dim() != q.dim()) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch, "cannot intersect polytopes of different dimension");
    }
    Eigen::MatrixXd A(p.A().rows() + q.A().rows(), p.A().cols());
    A << p.A(), q.A();
    Eigen::VectorXd b(p.b().size() + q.b().size());
    b << p.b(), q.b();
    try {
        return prune_redundant(Polytope(A, b));
    } catch (const GeometryError& e) {
        if (e.kind() == GeometryErrorKind::EmptyPolytope) {
            throw GeometryError(GeometryErrorKind::EmptyIntersection, "intersection is empty");
        }
        throw;
    }
}

/// Fix x_axis = value and return the polytope over the remaining axes.
inline Polytope slice(const Polytope& p, std::size_t axis, double value) {
    check_axis(p, axis);
    if (p.dim() < 2) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch, "cannot slice a one-dimensional polytope");
    }
    const Interval iv = p.bounds()[axis];
    const double tol = kFeasibilityTol * std::max(1.0, std::abs(value));
    if (!(value >= iv.lo - tol && value <= iv.hi + tol)) {
        throw GeometryError(GeometryErrorKind::EmptySlice,
                            "value " + std::to_string(value) + " outside axis bounds [" + std::to_string(iv.lo) +
                                ", " + std::to_string(iv.hi) + "]");
    }
    const auto ax = static_cast<Eigen::Index>(axis);
    const Eigen::Index k = p.A().cols();
    Eigen::MatrixXd A(p.A().rows(), k - 1);
    A.leftCols(ax) = p.A().leftCols(ax);
    A.rightCols(k - 1 - ax) = p.A().rightCols(k - 1 - ax);
    const Eigen::VectorXd b = p.b() + p.A().col(ax) * value;
    try {
        return Polytope(A, b);
    } catch (const GeometryError& e) {
        if (e.kind() == GeometryErrorKind::EmptyPolytope) {
            throw GeometryError(GeometryErrorKind::EmptySlice, "slice at " + std::to_string(value) + " is empty");
        }
        throw;
    }
}

/// Largest inscribed ball.
struct Ball {
    Eigen::VectorXd center;
    double radius = 0.0;
};

inline Ball chebyshev_center(const Polytope& p) {
    const Eigen::Index k = p.A().cols();
    const Eigen::Index m = p.A().rows();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, k + 1);
    Eigen::VectorXd h(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        A.row(i).head(k) = p.A().row(i);
        A(i, k) = p.A().row(i).norm();
        h(i) = -p.b()(i);
    }
    A(m, k) = -1.0;
    h(m) = 0.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
    c(k) = 1.0;
    const auto res = lp::maximize(c, A, h);
    if (res.status == lp::Status::Infeasible) {
        throw GeometryError(GeometryErrorKind::EmptyPolytope, "no Chebyshev center for an empty polytope");
    }
    if (res.status == lp::Status::Unbounded) {
        throw GeometryError(GeometryErrorKind::Unbounded, "inscribed ball radius is unbounded");
    }
    return {res.x.head(k), std::max(0.0, res.x(k))};
}

namespace detail {

// Lasserre's recursion on { x : A x <= h } stored row-major (m rows, n cols):
// vol_n(P) = (1/n) * sum_i h_i * vol_{n-1}(F_i) for unit-norm rows, where each
// facet is parameterized by eliminating its largest-magnitude coordinate.
inline double lasserre(std::vector<double> A, std::vector<double> h, std::size_t n) {
    constexpr double kZero = 1e-10;
    constexpr double kSame = 1e-10;
    std::size_t m = h.size();

    // Normalize, drop vanished rows, detect empty subsystems.
    std::size_t w = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) norm += A[i * n + j] * A[i * n + j];
        norm = std::sqrt(norm);
        if (norm < kZero) {
            if (h[i] < -kZero) return 0.0;
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) A[w * n + j] = A[i * n + j] / norm;
        h[w] = h[i] / norm;
        ++w;
    }
    m = w;

    // Parallel duplicates: keep the tighter one.
    std::vector<bool> dead(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        if (dead[i]) continue;
        for (std::size_t k = i + 1; k < m; ++k) {
            if (dead[k]) continue;
            double diff = 0.0;
            for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(A[i * n + j] - A[k * n + j]));
            if (diff < kSame) {
                if (h[k] < h[i]) h[i] = h[k];
                dead[k] = true;
            }
        }
    }

    if (n == 1) {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (dead[i]) continue;
            if (A[i] > 0.0) {
                hi = std::min(hi, h[i] / A[i]);
            } else {
                lo = std::max(lo, h[i] / A[i]);
            }
        }
        if (!std::isfinite(lo) || !std::isfinite(hi)) {
            throw GeometryError(GeometryErrorKind::Unbounded, "unbounded interval in volume recursion");
        }
        return std::max(0.0, hi - lo);
    }

    double total = 0.0;
    std::vector<double> subA;
    std::vector<double> subh;
    for (std::size_t i = 0; i < m; ++i) {
        if (dead[i] || std::abs(h[i]) < 1e-15) continue;
        std::size_t piv = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (std::abs(A[i * n + j]) > std::abs(A[i * n + piv])) piv = j;
        }
        const double ap = A[i * n + piv];
        subA.clear();
        subh.clear();
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i || dead[k]) continue;
            const double f = A[k * n + piv] / ap;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == piv) continue;
                subA.push_back(A[k * n + j] - f * A[i * n + j]);
            }
            subh.push_back(h[k] - f * h[i]);
        }
        const double facet = subh.empty() ? 0.0 : lasserre(subA, subh, n - 1);
        total += h[i] * facet / std::abs(ap);
    }
    return total / static_cast<double>(n);
}

// Volume of { x : A x + b <= 0 } for a bounded system with known bounding box.
// Coordinates are mapped to the unit box first for conditioning.
inline double box_normalized_volume(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                    std::span<const Interval> box) {
    const std::size_t n = static_cast<std::size_t>(A.cols());
    double jacobian = 1.0;
    for (const auto& iv : box) {
        if (iv.width() <= 1e-14) return 0.0;
        jacobian *= iv.width();
    }
    const std::size_t m = static_cast<std::size_t>(A.rows());
    std::vector<double> flat(m * n);
    std::vector<double> h(m);
    for (std::size_t i = 0; i < m; ++i) {
        double offset = b(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < n; ++j) {
            const double a = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            flat[i * n + j] = a * box[j].width();
            offset += a * box[j].midpoint();
        }
        h[i] = -offset;
    }
    return jacobian * lasserre(std::move(flat), std::move(h), n);
}

}  // namespace detail

/// Exact k-dimensional volume (Lasserre recursion after redundancy pruning).
inline double volume(const Polytope& p) {
    const Polytope pruned = prune_redundant(p);
    return detail::box_normalized_volume(pruned.A(), pruned.b(), pruned.bounds());
}

}  // namespace unidex::geom

#endif  // UNIDEX_POLYTOPE_HPP
