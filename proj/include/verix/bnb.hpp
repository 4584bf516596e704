#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "verix/bounds.hpp"
#include "verix/lp.hpp"
#include "verix/query.hpp"

namespace verix {

// ---- leaf encoding (shared with the exhaustive oracle) ----

// With every ReLU phase decided the network is affine over the free inputs.
// The program's variables are the free features (query order), constraints
// are the explicitly assigned phase inequalities, and the objective is the
// atom's violation margin minus `objective_offset`.
struct LeafEncoding {
    lp::LinearProgram program;
    double objective_offset = 0.0;
    std::vector<std::size_t> free;
};

// Phases come from `phases` when listed, otherwise from `bounds`, which must
// show the neuron stable. Throws InvalidArgument for an unphased unstable neuron.
LeafEncoding encode_leaf(const VerificationQuery& query, const AtomicQuery& atom, const NeuronBounds& bounds,
                         std::span<const PhaseConstraint> phases);

struct LeafResult {
    bool feasible = false;
    double optimum = 0.0;  // maximal margin when feasible
    std::optional<Violated> witness;
};

// Solves the leaf LP; a non-negative optimum (within the LP tolerance) is
// confirmed by forward evaluation. Throws lp::SolverFailure.
LeafResult solve_leaf(const VerificationQuery& query, const AtomicQuery& atom, const NeuronBounds& bounds,
                      std::span<const PhaseConstraint> phases);

// Relaxed bound for an interior node: maximises the symbolic upper bound of
// the margin over the free inputs, cut by the symbolic form of every phase
// split. nullopt when the cuts are jointly infeasible. `point` is the full
// input at the optimum.
struct NodeBound {
    double upper = 0.0;
    std::vector<double> point;
};

std::optional<NodeBound> node_lp_bound(const VerificationQuery& query, const NeuronBounds& bounds,
                                       const SymbolicBound& margin, std::span<const PhaseConstraint> phases);

// ---- branch and bound ----

struct BnbLimits {
    Seconds time_limit{300.0};
    std::size_t max_nodes = 10'000'000;
};

struct BnbStats {
    std::size_t nodes = 0;
    std::size_t leaves = 0;
    std::size_t pruned = 0;
    std::size_t infeasible = 0;
    std::size_t max_depth = 0;
    std::size_t unconfirmed = 0;  // leaves with optimum in [-tol, 0) or failed confirmation
    std::size_t lp_pruned = 0;    // interior nodes closed by node_lp_bound
};

struct BnbOptions {
    BnbLimits limits{};
    IncompleteOptions root{};
};

// Sound and complete (up to the LP tolerance) check by depth-first
// branch-and-bound over ReLU phases with LP-exact leaves.
Verdict check_complete(const VerificationQuery& query, const BnbOptions& options = {}, BnbStats* stats = nullptr);

class CompleteBackend : public VerificationBackend {
public:
    explicit CompleteBackend(BnbOptions options = {}) : options_(options) {}
    Verdict check(const VerificationQuery& query, Seconds time_limit) override;
    std::string name() const override { return "complete"; }
    const BnbStats& last_stats() const { return stats_; }

private:
    BnbOptions options_;
    BnbStats stats_;
};

}  // namespace verix
