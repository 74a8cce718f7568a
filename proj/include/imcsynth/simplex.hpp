// Dense two-phase tableau simplex over an Eigen matrix, templated on the
// scalar type. Dantzig pricing, switching to Bland's rule after a pivot
// budget so degenerate instances cannot cycle.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace imcsynth {

enum class Sense { LE, GE, EQ };

struct LpRow {
    std::vector<std::pair<int, double>> coef;
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

// maximize objective . x subject to rows, x >= 0.
struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::vector<std::string> names;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> dual;  // one per row, in the row's own orientation
    std::size_t pivots = 0;
    double gap = 0.0;          // |primal - dual objective| plus dual infeasibility
};

struct SimplexOptions {
    double tol = 1e-9;
    std::size_t bland_after = 0;     // 0: 50 * (rows + cols)
    std::size_t max_pivots = 0;      // 0: 200 * (rows + cols) + 10000
    double max_cells = 1.5e8;        // tableau entries allowed before giving up
};

struct LpNumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class Scalar = double>
class DenseSimplex {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    DenseSimplex(const LpProblem& p, SimplexOptions opt) : p_(p), opt_(opt) {}

    LpResult solve() {
        build();
        LpResult res;
        const std::size_t dim = m_ + cols_;
        bland_after_ = opt_.bland_after ? opt_.bland_after : 50 * dim;
        max_pivots_ = opt_.max_pivots ? opt_.max_pivots : 200 * dim + 10000;

        if (num_art_ > 0) {
            Vector cost = Vector::Zero(cols_);
            for (int j = art_begin_; j < cols_; ++j) cost(j) = Scalar(-1);
            price(cost);
            if (!iterate(false)) throw LpNumericalError("phase one reported unbounded (internal error)");
            if (T_(m_, cols_) < Scalar(-opt_.tol * 10)) {
                res.status = LpStatus::Infeasible;
                res.pivots = pivots_;
                return res;
            }
            evict_artificials();
        }
        Vector cost = Vector::Zero(cols_);
        for (int j = 0; j < p_.num_vars; ++j) cost(j) = Scalar(p_.objective[j]);
        price(cost);
        if (!iterate(true)) {
            res.status = LpStatus::Unbounded;
            res.pivots = pivots_;
            return res;
        }
        res.pivots = pivots_;
        res.objective = static_cast<double>(T_(m_, cols_));
        res.x.assign(p_.num_vars, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < p_.num_vars) res.x[basis_[i]] = static_cast<double>(T_(i, cols_));
        res.dual.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const int c = aux_col_[i];
            // Reduced cost of the row's own slack, surplus or artificial
            // column gives the dual of the stored (possibly negated) row.
            double y = static_cast<double>(T_(m_, c));
            if (sense_[i] == Sense::GE) y = -y;
            res.dual[i] = flipped_[i] ? -y : y;
        }
        res.gap = certificate(res);
        return res;
    }

private:
    // Tableau layout: original columns, one slack/surplus per inequality,
    // then artificials. The last row holds reduced costs, the last column rhs.
    void build() {
        m_ = static_cast<int>(p_.rows.size());
        const int n = p_.num_vars;
        int slack = 0;
        num_art_ = 0;
        flipped_.assign(m_, false);
        std::vector<Sense> sense(m_);
        for (int i = 0; i < m_; ++i) {
            Sense s = p_.rows[i].sense;
            if (p_.rows[i].rhs < 0) {
                flipped_[i] = true;
                if (s == Sense::LE) s = Sense::GE;
                else if (s == Sense::GE) s = Sense::LE;
            }
            sense[i] = s;
            if (s != Sense::EQ) ++slack;
            if (s != Sense::LE) ++num_art_;
        }
        art_begin_ = n + slack;
        cols_ = art_begin_ + num_art_;
        if (static_cast<double>(m_ + 1) * static_cast<double>(cols_ + 1) > opt_.max_cells)
            throw LpNumericalError("LP with " + std::to_string(m_) + " rows and " + std::to_string(cols_) +
                                   " tableau columns is too large for the dense simplex");
        T_ = Matrix::Zero(m_ + 1, cols_ + 1);
        basis_.assign(m_, -1);
        aux_col_.assign(m_, -1);
        int next_slack = n, next_art = art_begin_;
        for (int i = 0; i < m_; ++i) {
            const Scalar sign = flipped_[i] ? Scalar(-1) : Scalar(1);
            for (auto [j, v] : p_.rows[i].coef) T_(i, j) += sign * Scalar(v);
            T_(i, cols_) = sign * Scalar(p_.rows[i].rhs);
            if (sense[i] == Sense::LE) {
                T_(i, next_slack) = 1;
                basis_[i] = aux_col_[i] = next_slack++;
            } else if (sense[i] == Sense::GE) {
                T_(i, next_slack) = -1;
                aux_col_[i] = next_slack++;
                T_(i, next_art) = 1;
                basis_[i] = next_art++;
            } else {
                T_(i, next_art) = 1;
                basis_[i] = aux_col_[i] = next_art++;
            }
        }
        sense_ = std::move(sense);
    }

    void price(const Vector& cost) {
        cost_ = cost;
        T_.row(m_).setZero();
        T_.row(m_).head(cols_) = -cost;
        for (int i = 0; i < m_; ++i)
            if (cost(basis_[i]) != Scalar(0)) T_.row(m_) += cost(basis_[i]) * T_.row(i);
    }

    void pivot(int r, int c) {
        const Scalar piv = T_(r, c);
        T_.row(r) /= piv;
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col = T_.col(c);
        for (int i = 0; i <= m_; ++i) {
            if (i == r || col(i) == Scalar(0)) continue;
            T_.row(i) -= col(i) * T_.row(r);
        }
        basis_[r] = c;
        ++pivots_;
    }

    // Returns false when unbounded.
    bool iterate(bool bar_artificials) {
        const Scalar tol(opt_.tol);
        const int limit = bar_artificials ? art_begin_ : cols_;
        for (;;) {
            if (pivots_ > max_pivots_)
                throw LpNumericalError("simplex exceeded " + std::to_string(max_pivots_) +
                                       " pivots; try perturbing the instance");
            const bool bland = pivots_ >= bland_after_;
            int enter = -1;
            Scalar best = -tol;
            for (int j = 0; j < limit; ++j) {
                const Scalar rc = T_(m_, j);
                if (rc < best) {
                    enter = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            Scalar ratio = 0;
            for (int i = 0; i < m_; ++i) {
                const Scalar a = T_(i, enter);
                if (a <= tol) continue;
                const Scalar r = T_(i, cols_) / a;
                if (leave < 0 || r < ratio - tol || (r <= ratio + tol && basis_[i] < basis_[leave])) {
                    leave = i;
                    ratio = r;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    void evict_artificials() {
        const Scalar tol(opt_.tol);
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < art_begin_) continue;
            for (int j = 0; j < art_begin_; ++j)
                if (std::abs(static_cast<double>(T_(i, j))) > static_cast<double>(tol)) {
                    pivot(i, j);
                    break;
                }
        }
    }

    double certificate(const LpResult& r) const {
        double dual_obj = 0.0, infeas = 0.0;
        for (int i = 0; i < m_; ++i) dual_obj += r.dual[i] * p_.rows[i].rhs;
        std::vector<double> aty(p_.num_vars, 0.0);
        for (int i = 0; i < m_; ++i) {
            for (auto [j, v] : p_.rows[i].coef) aty[j] += v * r.dual[i];
            const double y = r.dual[i];
            if (p_.rows[i].sense == Sense::LE) infeas = std::max(infeas, -y);
            if (p_.rows[i].sense == Sense::GE) infeas = std::max(infeas, y);
        }
        for (int j = 0; j < p_.num_vars; ++j) infeas = std::max(infeas, p_.objective[j] - aty[j]);
        return std::abs(r.objective - dual_obj) + std::max(0.0, infeas);
    }

    const LpProblem& p_;
    SimplexOptions opt_;
    Matrix T_;
    Vector cost_;
    std::vector<int> basis_, aux_col_;
    std::vector<bool> flipped_;
    std::vector<Sense> sense_;
    int m_ = 0, cols_ = 0, art_begin_ = 0, num_art_ = 0;
    std::size_t pivots_ = 0, bland_after_ = 0, max_pivots_ = 0;
};

template <class Scalar = double>
LpResult simplex_solve(const LpProblem& p, SimplexOptions opt = {}) {
    return DenseSimplex<Scalar>(p, opt).solve();
}

}  // namespace imcsynth
