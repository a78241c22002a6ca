#ifndef UNIDEX_ROSENBLATT_HPP
#define UNIDEX_ROSENBLATT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "unidex/design_types.hpp"
#include "unidex/error.hpp"
#include "unidex/polytope.hpp"
#include "unidex/scene_model.hpp"

namespace unidex::design {

/// CDF of one axis of the uniform distribution on a polytope, marginalized
/// over the polytope's other axes:
///   F(t) = vol({x in region : x_axis <= t}) / vol(region).
/// Both volumes are exact; the numerator is the region cut by one extra
/// half-space, which equals the integral of slice volumes from the lower
/// bound to t.
class ConditionalCdf {
public:
    ConditionalCdf(const geom::Polytope& region, std::size_t axis) : axis_(axis) {
        geom::check_axis(region, axis);
        support_ = region.bounds()[axis];
        const std::size_t k = region.dim();
        const std::size_t m = region.rows();
        if (support_.width() <= 1e-14) return;  // point mass

        // Map the bounding box to [-1/2, 1/2]^k.
        n_ = k;
        rows_.assign((m + 1) * k, 0.0);
        h_.assign(m + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double offset = region.b()(static_cast<Eigen::Index>(i));
            for (std::size_t j = 0; j < k; ++j) {
                const auto& iv = region.bounds()[j];
                const double a = region.A()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                rows_[i * k + j] = a * iv.width();
                offset += a * iv.midpoint();
            }
            h_[i] = -offset;
        }
        rows_[m * k + axis] = 1.0;  // cut row, offset set per evaluation
        for (const auto& iv : region.bounds()) {
            if (iv.width() <= 1e-14) {
                throw NumericError(NumericErrorKind::ZeroVolume, "conditional region is degenerate");
            }
        }
        total_ = geom::detail::lasserre(std::vector<double>(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(m * k)),
                                        std::vector<double>(h_.begin(), h_.begin() + static_cast<std::ptrdiff_t>(m)), k);
        if (!(total_ > 1e-13)) {
            throw NumericError(NumericErrorKind::ZeroVolume, "conditional region has zero volume");
        }
    }

    double operator()(double t) const {
        if (t <= support_.lo) return 0.0;
        if (t >= support_.hi) return 1.0;
        if (n_ == 0) return 1.0;
        std::vector<double> h = h_;
        h.back() = (t - support_.midpoint()) / support_.width();
        const double cut = geom::detail::lasserre(rows_, std::move(h), n_);
        return std::clamp(cut / total_, 0.0, 1.0);
    }

    const geom::Interval& support() const { return support_; }
    std::size_t axis() const { return axis_; }
    bool is_point_mass() const { return n_ == 0; }

private:
    std::size_t axis_;
    geom::Interval support_;
    std::size_t n_ = 0;
    std::vector<double> rows_;  // unit-box coordinates, last row is the cut
    std::vector<double> h_;
    double total_ = 0.0;
};

/// Marginal CDF of `axis` for the uniform distribution on `region`; t is
/// clamped to the axis bounds.
inline double marginal_cdf(const geom::Polytope& region, std::size_t axis, double t) {
    return ConditionalCdf(region, axis)(t);
}

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Brent-Dekker root finder for f on a bracketing interval [a, b].
/// Stops when |f(x)| <= ftol or the bracket shrinks below xtol.
template <class F>
RootResult brent_root(F&& f, double a, double b, double ftol, double xtol, std::size_t max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (std::abs(fa) <= ftol) return {a, fa, 0};
    if (std::abs(fb) <= ftol) return {b, fb, 0};
    if ((fa > 0.0) == (fb > 0.0)) {
        throw NumericError(NumericErrorKind::ConvergenceFailure, "root is not bracketed");
    }
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(fb) <= ftol || std::abs(m) <= tol) return {b, fb, iter};
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            // Inverse quadratic interpolation, or secant when only two points.
            const double s = fb / fa;
            double p;
            double q;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            } else {
                p = -p;
            }
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    throw NumericError(NumericErrorKind::ConvergenceFailure,
                       "Brent iteration limit of " + std::to_string(max_iter) + " reached");
}

inline constexpr double kCdfResidualTol = 1e-9;
inline constexpr std::size_t kBrentMaxIter = 200;

/// Quantile of a conditional CDF: t with |F(t) - u| <= 1e-9 within the
/// support; u = 0 and u = 1 map to the support endpoints.
inline double invert_cdf(const ConditionalCdf& cdf, double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw NumericError(NumericErrorKind::NonFinite, "CDF level " + std::to_string(u) + " is outside [0, 1]");
    }
    const auto& iv = cdf.support();
    if (cdf.is_point_mass() || u <= 0.0) return iv.lo;
    if (u >= 1.0) return iv.hi;
    const double xtol = 1e-15 * std::max(1.0, std::max(std::abs(iv.lo), std::abs(iv.hi)));
    return brent_root([&](double t) { return cdf(t) - u; }, iv.lo, iv.hi, kCdfResidualTol, xtol, kBrentMaxIter).x;
}

namespace detail {

inline void check_shapes(const geom::Polytope& domain, const Eigen::MatrixXd& pts, const scene::ConditioningOrder& order) {
    if (static_cast<std::size_t>(pts.cols()) != domain.dim() || order.size() != domain.dim()) {
        throw GeometryError(GeometryErrorKind::DimensionMismatch,
                            "design has " + std::to_string(pts.cols()) + " columns, domain has " +
                                std::to_string(domain.dim()) + " dimensions");
    }
}

// Walk the conditioning order for one point. `step(cdf, dim)` returns the
// value fixed for that dim.
template <class Step>
void rosenblatt_walk(const geom::Polytope& domain, const scene::ConditioningOrder& order, std::size_t row,
                                Step&& step) {
    const std::size_t d = domain.dim();
    std::vector<std::size_t> remaining(d);
    std::iota(remaining.begin(), remaining.end(), 0);
    geom::Polytope current = domain;
    for (std::size_t s = 0; s < d; ++s) {
        const std::size_t dim = order[s];
        const auto local = static_cast<std::size_t>(std::find(remaining.begin(), remaining.end(), dim) - remaining.begin());
        try {
            const ConditionalCdf cdf(current, local);
            const double value = step(cdf, dim);
            if (s + 1 < d) {
                current = geom::slice(current, local, value);
                remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(local));
            }
        } catch (const Error&) {
            rethrow_with_context("point " + std::to_string(row) + ", axis " + std::to_string(dim));
        }
    }
}

}  // namespace detail

/// Map hypercube points into the polytope: column j of `u` drives dim j, and
/// dims are fixed in `order`, each through the inverse of its CDF conditioned
/// on the dims fixed before it.
inline Eigen::MatrixXd inverse_rosenblatt(const geom::Polytope& domain, const Eigen::MatrixXd& u,
                                          const scene::ConditioningOrder& order) {
    detail::check_shapes(domain, u, order);
    const geom::Polytope pruned = geom::prune_redundant(domain);
    Eigen::MatrixXd x(u.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        detail::rosenblatt_walk(pruned, order, static_cast<std::size_t>(i), [&](const ConditionalCdf& cdf, std::size_t dim) {
            const double v = invert_cdf(cdf, u(i, static_cast<Eigen::Index>(dim)));
            x(i, static_cast<Eigen::Index>(dim)) = v;
            return v;
        });
    }
    return x;
}

/// Inverse of inverse_rosenblatt: u_j = F_j(x_j | dims fixed earlier).
inline Eigen::MatrixXd forward_rosenblatt(const geom::Polytope& domain, const Eigen::MatrixXd& x,
                                          const scene::ConditioningOrder& order) {
    detail::check_shapes(domain, x, order);
    const geom::Polytope pruned = geom::prune_redundant(domain);
    Eigen::MatrixXd u(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        detail::rosenblatt_walk(pruned, order, static_cast<std::size_t>(i), [&](const ConditionalCdf& cdf, std::size_t dim) {
            const double v = cdf.support().clamp(x(i, static_cast<Eigen::Index>(dim)));
            u(i, static_cast<Eigen::Index>(dim)) = cdf(v);
            return v;
        });
    }
    return u;
}

/// Scene-level transform: the order is checked against the dependency graph.
inline Design inverse_rosenblatt(const scene::JointDomain& domain, const scene::SceneGraph& graph,
                                 const HypercubeDesign& hd, const scene::ConditioningOrder& order) {
    const auto checked = scene::ConditioningOrder::checked(order.perm(), graph);
    Design out;
    out.points = inverse_rosenblatt(domain.polytope, hd.points, checked);
    out.dim_meta = domain.dim_meta;
    out.order_used = checked;
    return out;
}

inline HypercubeDesign forward_rosenblatt(const scene::JointDomain& domain, const scene::SceneGraph& graph,
                                          const Design& design, const scene::ConditioningOrder& order) {
    const auto checked = scene::ConditioningOrder::checked(order.perm(), graph);
    HypercubeDesign out;
    out.points = forward_rosenblatt(domain.polytope, design.points, checked);
    return out;
}

}  // namespace unidex::design

#endif  // UNIDEX_ROSENBLATT_HPP
