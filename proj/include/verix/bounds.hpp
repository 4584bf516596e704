#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "verix/model.hpp"
#include "verix/query.hpp"
#include "verix/simd.hpp"

namespace verix {

struct IntervalVector {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
};

// Bounds on the output of every layer. The pre-activation bounds of a ReLU
// layer k are the outputs of layer k-1 (or the input box for k == 0).
struct NeuronBounds {
    IntervalVector input;
    std::vector<IntervalVector> layers;

    const IntervalVector& output(std::size_t layer) const { return layers[layer]; }
    const IntervalVector& pre_activation(std::size_t layer) const {
        return layer == 0 ? input : layers[layer - 1];
    }
};

// coeffs . x + constant over the network inputs.
struct LinearExpr {
    std::vector<double> coeffs;
    double constant = 0.0;

    double evaluate(std::span<const double> x) const;
    // Range of the expression over a box.
    simd::Range concretize(const IntervalVector& box) const;
};

struct SymbolicBound {
    LinearExpr lower;
    LinearExpr upper;
};

enum class Phase { Inactive, Active };

// `layer` is the index of a ReLU layer; the constraint is on its input.
struct PhaseConstraint {
    std::size_t layer = 0;
    std::size_t neuron = 0;
    Phase phase = Phase::Inactive;

    bool operator==(const PhaseConstraint&) const = default;
};

IntervalVector to_intervals(const BoxBounds& box);

// Interval arithmetic with phase constraints intersected into ReLU inputs.
// nullopt signals an infeasible phase set (the branch is vacuous).
std::optional<NeuronBounds> interval_propagate(const Network& net, const BoxBounds& box,
                                               std::span<const PhaseConstraint> phases = {});

// Single-neuron ReLU relaxation for pre-activation range [l, u].
// Upper line: y <= upper_slope * x + upper_offset; lower line: y >= lower_slope * x.
struct ReluRelaxation {
    double upper_slope = 0.0;
    double upper_offset = 0.0;
    double lower_slope = 0.0;
};

ReluRelaxation relax_relu(double l, double u);

struct BacksubResult {
    NeuronBounds bounds;
    std::vector<SymbolicBound> outputs;  // one per network output
};

// Back-substitution analysis: every affine layer's bounds come from
// substituting the relaxations back to the input box, intersected with the
// interval step, so the result is never wider than interval_propagate.
std::optional<BacksubResult> backsub_propagate(const Network& net, const BoxBounds& box,
                                               std::span<const PhaseConstraint> phases = {});

// Symbolic bounds on out_coeffs . z + offset, z the network output,
// back-substituted through `bounds` (from backsub_propagate).
SymbolicBound bound_output_expression(const Network& net, const NeuronBounds& bounds,
                                      std::span<const double> out_coeffs, double offset);

// Symbolic bounds on the ReLU input of each constrained neuron, valid over
// the region where `bounds` hold. One entry per constraint, in order.
std::vector<SymbolicBound> pre_activation_expressions(const Network& net, const NeuronBounds& bounds,
                                                      std::span<const PhaseConstraint> phases);

struct UnstableNeuron {
    std::size_t layer = 0;  // ReLU layer index
    std::size_t neuron = 0;
    double lower = 0.0;
    double upper = 0.0;
};

// ReLU neurons whose pre-activation range straddles zero, in (layer, neuron) order.
std::vector<UnstableNeuron> unstable_neurons(const Network& net, const NeuronBounds& bounds);

// Concrete falsification of one atom over the query box.
struct FalsifierBudget {
    std::size_t random_samples = 1024;
    std::size_t greedy_steps = 50;
};

std::optional<Violated> falsify(const VerificationQuery& query, const AtomicQuery& atom,
                                const SymbolicBound& margin_bound, std::uint64_t seed, const FalsifierBudget& budget,
                                const Deadline& deadline);

// Candidate points the falsifier tries first: the box corners that maximise
// the symbolic upper and lower margin bounds.
std::vector<std::vector<double>> signed_corners(const BoxBounds& box, const SymbolicBound& margin_bound);

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

struct IncompleteOptions {
    std::uint64_t seed = 0x5eed;
    FalsifierBudget budget{};
};

// Sound but incomplete check: back-substitution proof per atom, concrete
// falsification otherwise, Unknown when neither succeeds.
Verdict check_incomplete(const VerificationQuery& query, Seconds time_limit, const IncompleteOptions& options = {});

class IncompleteBackend : public VerificationBackend {
public:
    explicit IncompleteBackend(IncompleteOptions options = {}) : options_(options) {}
    Verdict check(const VerificationQuery& query, Seconds time_limit) override;
    std::string name() const override { return "incomplete"; }

private:
    IncompleteOptions options_;
};

}  // namespace verix
