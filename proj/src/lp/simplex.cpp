#include <algorithm>
#include <cmath>
#include <limits>

#include "verix/lp.hpp"
#include "verix/simd.hpp"

namespace verix::lp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTolerance = 1e-9;
constexpr double kCostTolerance = 1e-9;

// Columns: structurals (shifted to lower bound 0), one slack per row, then
// one artificial per row whose initial residual is negative.
class Tableau {
public:
    Tableau(const LinearProgram& lp, const Options& options, Stats* stats)
        : options_(options), stats_(stats), n_(lp.variables()), m_(lp.constraints.size()) {
        std::vector<double> residual(m_);
        std::size_t artificials = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = lp.constraints[i].coeffs;
            residual[i] = lp.constraints[i].rhs - simd::dot(row, lp.lower);
            if (residual[i] < 0.0) ++artificials;
        }
        cols_ = n_ + m_ + artificials;
        first_artificial_ = n_ + m_;
        table_ = std::vector<double>(m_ * cols_, 0.0);
        upper_.assign(cols_, kInf);
        value_.assign(cols_, 0.0);
        at_upper_.assign(cols_, false);
        basis_.assign(m_, 0);
        basic_row_.assign(cols_, npos);

        for (std::size_t j = 0; j < n_; ++j) upper_[j] = lp.upper[j] - lp.lower[j];

        std::size_t art = first_artificial_;
        for (std::size_t i = 0; i < m_; ++i) {
            const double sign = residual[i] < 0.0 ? -1.0 : 1.0;
            double* row = &table_[i * cols_];
            for (std::size_t j = 0; j < n_; ++j) row[j] = sign * lp.constraints[i].coeffs[j];
            row[n_ + i] = sign;
            if (sign < 0.0) {
                row[art] = 1.0;
                set_basic(i, art++, -residual[i]);
            } else {
                set_basic(i, n_ + i, residual[i]);
            }
        }
    }

    // Phase 1: drive artificials to zero. False if the program is infeasible.
    bool phase_one() {
        if (first_artificial_ == cols_) return true;
        std::vector<double> cost(cols_, 0.0);
        for (std::size_t j = first_artificial_; j < cols_; ++j) cost[j] = -1.0;
        if (!optimize(cost)) throw SolverFailure("phase 1 reported unbounded");
        double infeasibility = 0.0;
        for (std::size_t j = first_artificial_; j < cols_; ++j) infeasibility += value_[j];
        if (infeasibility > options_.feasibility_tolerance) return false;
        // Artificials stay pinned at zero from here on.
        for (std::size_t j = first_artificial_; j < cols_; ++j) upper_[j] = 0.0;
        return true;
    }

    // Phase 2 on the shifted structural costs. False if unbounded.
    bool phase_two(const std::vector<double>& structural_cost) {
        std::vector<double> cost(cols_, 0.0);
        std::copy(structural_cost.begin(), structural_cost.end(), cost.begin());
        return optimize(cost);
    }

    double structural(std::size_t j) const { return value_[j]; }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    void set_basic(std::size_t row, std::size_t col, double value) {
        basis_[row] = col;
        basic_row_[col] = row;
        value_[col] = value;
        at_upper_[col] = false;
    }

    double lower_of(std::size_t) const { return 0.0; }

    // Maximizes cost . x. Returns false on unbounded.
    bool optimize(const std::vector<double>& cost) {
        std::vector<double> reduced(cols_);
        for (;;) {
            // reduced_j = c_j - c_B^T T_j
            std::copy(cost.begin(), cost.end(), reduced.begin());
            for (std::size_t i = 0; i < m_; ++i) {
                const double cb = cost[basis_[i]];
                if (cb != 0.0) simd::axpy(-cb, {&table_[i * cols_], cols_}, reduced);
            }

            // Bland: lowest-index improving nonbasic column.
            std::size_t entering = npos;
            double direction = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (basic_row_[j] != npos || upper_[j] <= 0.0) continue;
                if (!at_upper_[j] && reduced[j] > kCostTolerance) {
                    entering = j;
                    direction = 1.0;
                    break;
                }
                if (at_upper_[j] && reduced[j] < -kCostTolerance) {
                    entering = j;
                    direction = -1.0;
                    break;
                }
            }
            if (entering == npos) return true;

            // Ratio test; ties go to the lowest basic variable index.
            double step = upper_[entering];
            std::size_t leaving_row = npos;
            bool leaving_to_upper = false;
            for (std::size_t i = 0; i < m_; ++i) {
                const double t = table_[i * cols_ + entering] * direction;
                if (std::abs(t) <= kPivotTolerance) continue;
                const std::size_t b = basis_[i];
                double limit;
                bool to_upper;
                if (t > 0.0) {
                    limit = std::max(0.0, value_[b] - lower_of(b)) / t;
                    to_upper = false;
                } else {
                    if (upper_[b] == kInf) continue;
                    limit = std::max(0.0, upper_[b] - value_[b]) / -t;
                    to_upper = true;
                }
                if (limit < step || (limit == step && leaving_row != npos && b < basis_[leaving_row])) {
                    step = limit;
                    leaving_row = i;
                    leaving_to_upper = to_upper;
                }
            }
            if (step == kInf) return false;

            if (++pivots_ > options_.max_pivots) throw SolverFailure("simplex pivot limit exceeded");

            for (std::size_t i = 0; i < m_; ++i) {
                value_[basis_[i]] -= table_[i * cols_ + entering] * direction * step;
            }
            value_[entering] += direction * step;

            if (leaving_row == npos) {
                at_upper_[entering] = direction > 0.0;
                value_[entering] = at_upper_[entering] ? upper_[entering] : 0.0;
                if (stats_) ++stats_->bound_flips;
                continue;
            }
            pivot(leaving_row, entering, leaving_to_upper);
            if (stats_) ++stats_->pivots;
        }
    }

    void pivot(std::size_t row, std::size_t entering, bool leaving_to_upper) {
        const std::size_t leaving = basis_[row];
        double* prow = &table_[row * cols_];
        const double inv = 1.0 / prow[entering];
        for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
        prow[entering] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            double* r = &table_[i * cols_];
            const double f = r[entering];
            if (f == 0.0) continue;
            simd::axpy(-f, {prow, cols_}, {r, cols_});
            r[entering] = 0.0;
        }
        basic_row_[leaving] = npos;
        at_upper_[leaving] = leaving_to_upper;
        value_[leaving] = leaving_to_upper ? upper_[leaving] : 0.0;
        const double entering_value = value_[entering];
        set_basic(row, entering, entering_value);
    }

    Options options_;
    Stats* stats_;
    std::size_t n_;
    std::size_t m_;
    std::size_t cols_ = 0;
    std::size_t first_artificial_ = 0;
    std::size_t pivots_ = 0;
    std::vector<double> table_;
    std::vector<double> upper_;
    std::vector<double> value_;
    std::vector<bool> at_upper_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> basic_row_;
};

void validate(const LinearProgram& lp) {
    const std::size_t n = lp.variables();
    if (lp.upper.size() != n || lp.objective.size() != n) throw InvalidArgument("LP vectors disagree in length");
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(lp.lower[j])) throw InvalidArgument("LP lower bounds must be finite");
        if (std::isnan(lp.upper[j]) || lp.upper[j] < lp.lower[j]) throw InvalidArgument("LP bound lower > upper");
        if (!std::isfinite(lp.objective[j])) throw InvalidArgument("non-finite LP objective");
    }
    for (const Constraint& c : lp.constraints) {
        if (c.coeffs.size() != n) throw InvalidArgument("LP constraint row has wrong length");
        if (!std::isfinite(c.rhs) || !std::ranges::all_of(c.coeffs, [](double v) { return std::isfinite(v); })) {
            throw InvalidArgument("non-finite LP constraint");
        }
    }
}

}  // namespace

double max_violation(const LinearProgram& lp, const std::vector<double>& point) {
    double worst = 0.0;
    for (std::size_t j = 0; j < lp.variables(); ++j) {
        worst = std::max({worst, lp.lower[j] - point[j], point[j] - lp.upper[j]});
    }
    for (const Constraint& c : lp.constraints) worst = std::max(worst, simd::dot(c.coeffs, point) - c.rhs);
    return worst;
}

Solution solve(const LinearProgram& lp, const Options& options, Stats* stats) {
    validate(lp);
    Tableau tableau(lp, options, stats);
    if (!tableau.phase_one()) return Infeasible{};

    const double sign = lp.sense == Sense::Maximize ? 1.0 : -1.0;
    std::vector<double> cost(lp.variables());
    for (std::size_t j = 0; j < cost.size(); ++j) cost[j] = sign * lp.objective[j];
    if (!tableau.phase_two(cost)) return Unbounded{};

    Optimal opt;
    opt.point.resize(lp.variables());
    for (std::size_t j = 0; j < lp.variables(); ++j) {
        opt.point[j] = std::clamp(lp.lower[j] + tableau.structural(j), lp.lower[j], lp.upper[j]);
    }
    opt.value = simd::dot(lp.objective, opt.point);

    double scale = 1.0;
    for (const Constraint& c : lp.constraints) scale = std::max(scale, std::abs(c.rhs));
    if (max_violation(lp, opt.point) > options.feasibility_tolerance * scale) {
        throw SolverFailure("optimal point violates constraints beyond tolerance");
    }
    return opt;
}

}  // namespace verix::lp
