#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "verix/model.hpp"
#include "verix/query.hpp"

namespace verix {

enum class TransformKind { Deletion, Reversal };

// Deletion: T(x) = 0. Reversal: T(x) = upper - x.
struct Transform {
    TransformKind kind = TransformKind::Deletion;
    double upper = 1.0;

    double apply(double x) const { return kind == TransformKind::Deletion ? 0.0 : upper - x; }
};

// Component i: f_c(x) - f_c(x') with x' = x except x'_i = T(x_i). f_c is the
// logit of the predicted label for classification, the output for regression.
std::vector<double> sensitivity(const Network& net, std::span<const double> x, const Transform& transform);

enum class TraversalKind { Sequential, Random, Sensitivity };
enum class SensitivityRanking { Magnitude, Signed };

struct TraversalSpec {
    TraversalKind kind = TraversalKind::Sequential;
    std::uint64_t seed = 0;
    Transform transform{};
    SensitivityRanking ranking = SensitivityRanking::Magnitude;
};

struct Traversal {
    std::vector<std::size_t> order;
    TraversalSpec spec;
};

Traversal traversal_order(const Network& net, std::span<const double> x, const TraversalSpec& spec);

// Fisher-Yates shuffle of 0..d-1 driven by a seeded SplitMix64 stream.
std::vector<std::size_t> seeded_permutation(std::size_t d, std::uint64_t seed);

struct StepRecord {
    std::size_t feature = 0;
    VerdictKind verdict = VerdictKind::Holds;
    double time_s = 0.0;

    bool operator==(const StepRecord&) const = default;
};

struct Counterfactual {
    std::size_t feature = 0;
    std::vector<double> input;
    std::vector<double> output;
    Prediction prediction;

    bool operator==(const Counterfactual&) const = default;
};

struct ExplanationParams {
    double epsilon = 0.0;
    Norm norm = Norm::Linf;
    std::optional<double> delta;
    std::string backend;
    TraversalSpec traversal;
};

struct Explanation {
    ExplanationParams params;
    Prediction prediction;
    std::vector<std::size_t> order;      // traversal actually used
    std::vector<std::size_t> explanation;  // A, in visiting order
    std::vector<std::size_t> irrelevant;   // B, in visiting order
    std::vector<std::size_t> unknown;      // members of A decided by an Unknown verdict
    std::vector<Counterfactual> counterfactuals;
    std::vector<StepRecord> steps;
    std::size_t backend_calls = 0;
};

struct VerixOptions {
    double epsilon = 0.05;
    Norm norm = Norm::Linf;
    std::optional<double> delta;  // required for regression networks
    TraversalSpec traversal{};
    Seconds per_query_time_limit{300.0};
};

// Greedy sweep: one backend call per feature in traversal order. Holds moves
// the feature into the irrelevant set; Violated puts it in the explanation
// with its counterfactual; Unknown puts it in the explanation without one.
// Throws ContractViolation if the backend returns a bad witness.
Explanation verix(const Network& net, std::span<const double> x, const VerixOptions& options,
                  VerificationBackend& backend);

OutputProperty property_for(const Network& net, const Prediction& prediction, std::optional<double> delta);

// Smallest sweep epsilon at which each feature was irrelevant.
struct EpsilonMap {
    std::vector<double> epsilons;  // strictly descending
    std::vector<std::optional<double>> smallest_irrelevant;
    std::vector<Explanation> runs;
};

EpsilonMap epsilon_sweep(const Network& net, std::span<const double> x, std::span<const double> epsilons,
                         const VerixOptions& base, VerificationBackend& backend);

struct ValidationReport {
    std::size_t random_samples = 0;
    std::size_t random_violations = 0;
    std::size_t directed_samples = 0;
    std::size_t directed_violations = 0;
    std::size_t counterfactuals_checked = 0;
    std::size_t counterfactual_failures = 0;

    std::size_t violations() const { return random_violations + directed_violations; }
    bool passed() const { return violations() == 0 && counterfactual_failures == 0; }
};

// Samples perturbations of the irrelevant features (explanation features
// pinned) and checks the prediction never changes. Also probes around each
// stored counterfactual whose deviations the claimed irrelevant set would
// permit, and re-checks every counterfactual's own invariants.
ValidationReport validate_explanation(const Network& net, std::span<const double> x, const Explanation& explanation,
                                      std::size_t samples, std::uint64_t seed);

// The invariants a counterfactual for step `feature` must satisfy, given the
// irrelevant set at that step.
bool counterfactual_valid(const Network& net, std::span<const double> x, const Explanation& explanation,
                          const Counterfactual& cf, std::span<const std::size_t> irrelevant_at_step,
                          double slack = 1e-9);

}  // namespace verix
