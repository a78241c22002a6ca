#ifndef UNIDEX_LP_HPP
#define UNIDEX_LP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "unidex/error.hpp"

namespace unidex::geom::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;
    double value = -std::numeric_limits<double>::infinity();
};

namespace detail {

// Dense two-phase tableau simplex with Bland's rule. Sized for the small
// systems that describe scene regions (tens of rows, about ten columns).
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double& objective(std::size_t c) { return at(rows_, c); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        basis_[pr] = pc;
    }

    // Re-express the objective row so basic columns carry zero reduced cost.
    void price_out() {
        for (std::size_t r = 0; r < rows_; ++r) {
            const double f = objective(basis_[r]);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) objective(c) -= f * at(r, c);
        }
    }

    // Returns false when the objective is unbounded.
    bool optimize(const std::vector<bool>& allowed) {
        constexpr double kEps = 1e-11;
        const std::size_t max_iter = 100 * (rows_ + cols_) + 1000;
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            std::size_t enter = cols_;
            for (std::size_t c = 0; c < cols_; ++c) {
                if (allowed[c] && objective(c) < -kEps) {
                    enter = c;
                    break;
                }
            }
            if (enter == cols_) return true;

            std::size_t leave = rows_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows_; ++r) {
                const double a = at(r, enter);
                if (a <= kEps) continue;
                const double ratio = rhs(r) / a;
                if (ratio < best - 1e-14 ||
                    (std::abs(ratio - best) <= 1e-14 && leave < rows_ && basis_[r] < basis_[leave])) {
                    best = ratio;
                    leave = r;
                }
            }
            if (leave == rows_) return false;
            pivot(leave, enter);
        }
        throw NumericError(NumericErrorKind::ConvergenceFailure, "simplex iteration limit reached");
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Maximize c·x subject to A·x ≤ h with x unrestricted in sign.
inline Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& h) {
    constexpr double kFeasTol = 1e-9;
    const auto n = static_cast<std::size_t>(A.cols());

    // Normalize rows; drop zero rows (or report infeasibility).
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double norm = A.row(i).norm();
        if (norm < 1e-12) {
            if (h(i) < -kFeasTol) return {};
            continue;
        }
        rows.emplace_back(A.row(i).transpose() / norm);
        rhs.push_back(h(i) / norm);
    }
    const std::size_t m = rows.size();

    std::size_t n_art = 0;
    for (double v : rhs) n_art += v < 0.0 ? 1 : 0;

    // Columns: x+ (n), x- (n), slack (m), artificial (n_art).
    const std::size_t cols = 2 * n + m + n_art;
    detail::Tableau t(m, cols);
    std::vector<bool> is_art(cols, false);
    std::size_t art = 2 * n + m;
    for (std::size_t r = 0; r < m; ++r) {
        const double sign = rhs[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            t.at(r, j) = sign * rows[r](static_cast<Eigen::Index>(j));
            t.at(r, n + j) = -sign * rows[r](static_cast<Eigen::Index>(j));
        }
        t.at(r, 2 * n + r) = sign;
        t.rhs(r) = sign * rhs[r];
        if (sign < 0.0) {
            t.at(r, art) = 1.0;
            is_art[art] = true;
            t.basis()[r] = art++;
        } else {
            t.basis()[r] = 2 * n + r;
        }
    }

    std::vector<bool> allowed(cols, true);
    if (n_art > 0) {
        for (std::size_t j = 0; j < cols; ++j) t.objective(j) = is_art[j] ? 1.0 : 0.0;
        t.objective(cols) = 0.0;
        t.price_out();
        t.optimize(allowed);
        double infeasibility = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            if (is_art[t.basis()[r]]) infeasibility += t.rhs(r);
        }
        if (infeasibility > kFeasTol) return {};
        // Drive remaining zero-level artificials out of the basis.
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_art[t.basis()[r]]) continue;
            for (std::size_t j = 0; j < 2 * n + m; ++j) {
                if (std::abs(t.at(r, j)) > 1e-9) {
                    t.pivot(r, j);
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < cols; ++j) allowed[j] = !is_art[j];
    }

    for (std::size_t j = 0; j <= cols; ++j) t.objective(j) = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        t.objective(j) = -c(static_cast<Eigen::Index>(j));
        t.objective(n + j) = c(static_cast<Eigen::Index>(j));
    }
    t.price_out();
    Result result;
    if (!t.optimize(allowed)) {
        result.status = Status::Unbounded;
        result.value = std::numeric_limits<double>::infinity();
        return result;
    }

    result.status = Status::Optimal;
    result.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t b = t.basis()[r];
        if (b < n) {
            result.x(static_cast<Eigen::Index>(b)) += t.rhs(r);
        } else if (b < 2 * n) {
            result.x(static_cast<Eigen::Index>(b - n)) -= t.rhs(r);
        }
    }
    result.value = c.dot(result.x);
    return result;
}

/// Feasibility of A·x ≤ h (within the solver's feasibility tolerance).
inline bool feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& h) {
    return maximize(Eigen::VectorXd::Zero(A.cols()), A, h).status != Status::Infeasible;
}

}  // namespace unidex::geom::lp

#endif  // UNIDEX_LP_HPP
