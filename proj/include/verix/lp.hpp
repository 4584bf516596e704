#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "verix/errors.hpp"

namespace verix::lp {

enum class Sense { Maximize, Minimize };

// coeffs . x <= rhs
struct Constraint {
    std::vector<double> coeffs;
    double rhs = 0.0;
};

// Variables carry box bounds; lower bounds must be finite, upper bounds may
// be +infinity.
struct LinearProgram {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Constraint> constraints;
    std::vector<double> objective;
    Sense sense = Sense::Maximize;

    std::size_t variables() const { return lower.size(); }
};

struct Optimal {
    std::vector<double> point;
    double value = 0.0;
};
struct Infeasible {};
struct Unbounded {};

using Solution = std::variant<Optimal, Infeasible, Unbounded>;

inline constexpr double kFeasibilityTolerance = 1e-7;

struct Options {
    std::size_t max_pivots = 1'000'000;
    double feasibility_tolerance = kFeasibilityTolerance;
};

// Pivot cap exceeded or an optimum that fails the feasibility re-check.
class SolverFailure : public Error {
public:
    using Error::Error;
};

struct Stats {
    std::size_t pivots = 0;
    std::size_t bound_flips = 0;
};

// Two-phase bounded-variable primal simplex, dense tableau, Bland's rule.
Solution solve(const LinearProgram& program, const Options& options = {}, Stats* stats = nullptr);

// Largest violation of any bound or constraint at `point`.
double max_violation(const LinearProgram& program, const std::vector<double>& point);

}  // namespace verix::lp
