#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "verix/model.hpp"

namespace verix {

enum class Norm { Linf, L1, L2 };

std::string_view norm_name(Norm norm);
Norm parse_norm(std::string_view text);

// Per-input bounds; lower <= upper componentwise.
struct BoxBounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
    bool contains(std::span<const double> x, double tol = 0.0) const;
    bool operator==(const BoxBounds&) const = default;
};

// Sorted, disjoint index sets covering 0..d-1.
struct FeaturePartition {
    std::vector<std::size_t> free;
    std::vector<std::size_t> fixed;

    static FeaturePartition from_free(std::size_t d, std::vector<std::size_t> free);
};

struct ClassificationProperty {
    std::size_t label = 0;
};

// Holds iff |y - target| <= delta.
struct RegressionProperty {
    double target = 0.0;
    double delta = 0.0;
};

using OutputProperty = std::variant<ClassificationProperty, RegressionProperty>;

// True iff the outputs break the property. For classification a tie with a
// competing logit counts as a violation.
bool violates(const OutputProperty& property, std::span<const double> outputs);

class VerificationQuery {
public:
    VerificationQuery(const Network& net, std::vector<double> center, FeaturePartition partition, double epsilon,
                      OutputProperty property, Norm norm = Norm::Linf);

    const Network& net() const { return *net_; }
    const std::vector<double>& center() const { return center_; }
    const FeaturePartition& partition() const { return partition_; }
    double epsilon() const { return epsilon_; }
    Norm norm() const { return norm_; }
    const OutputProperty& property() const { return property_; }

    // Free features: [max(0, x-eps), min(1, x+eps)]; fixed: [x, x].
    const BoxBounds& box() const { return box_; }

private:
    const Network* net_;
    std::vector<double> center_;
    FeaturePartition partition_;
    double epsilon_;
    Norm norm_;
    OutputProperty property_;
    BoxBounds box_;
};

// Alg. line 7-9 shape: free = irrelevant ∪ {candidate}, everything else pinned.
VerificationQuery build_query(const Network& net, std::span<const double> x, std::span<const std::size_t> irrelevant,
                              std::size_t candidate, double epsilon, OutputProperty property, Norm norm = Norm::Linf);

// One disjunct of the violation condition: violated iff margin(z) > 0
// (strict) or margin(z) >= 0, where margin(z) = coeffs . z + offset.
struct AtomicQuery {
    std::size_t index = 0;
    std::vector<double> output_coeffs;
    double offset = 0.0;
    bool strict = false;

    double margin(std::span<const double> outputs) const;
    bool violated_by(std::span<const double> outputs) const;
    // Whether an upper bound on the margin rules out any violation.
    bool refuted_by_upper_bound(double upper) const { return strict ? upper <= 0.0 : upper < 0.0; }
};

std::vector<AtomicQuery> decompose(const VerificationQuery& query);

enum class UnknownReason { Timeout, PrecisionExhausted };

struct Holds {};
struct Violated {
    std::vector<double> witness;
    std::vector<double> outputs;
};
struct Unknown {
    UnknownReason reason = UnknownReason::Timeout;
};

using Verdict = std::variant<Holds, Violated, Unknown>;

enum class VerdictKind { Holds, Violated, Unknown };
VerdictKind kind_of(const Verdict& verdict);
std::string_view verdict_name(VerdictKind kind);
std::string describe(const Verdict& verdict);

// Clamps `point` into the query box and re-evaluates it. Returns the witness
// only if the clamped point concretely violates the property.
std::optional<Violated> confirm_witness(const VerificationQuery& query, std::span<const double> point);

// Throws ContractViolation unless a Violated verdict's witness lies in the
// query box and violates the property under forward evaluation.
void check_witness_contract(const VerificationQuery& query, const Verdict& verdict);

using Seconds = std::chrono::duration<double>;

class Deadline {
public:
    explicit Deadline(Seconds limit);
    bool expired() const;
    Seconds remaining() const;

private:
    std::chrono::steady_clock::time_point end_;
};

// checkValid: sound decision procedure for one query. Holds is returned only
// if the property truly holds; Violated always carries a witness that passes
// check_witness_contract.
class VerificationBackend {
public:
    virtual ~VerificationBackend() = default;
    virtual Verdict check(const VerificationQuery& query, Seconds time_limit) = 0;
    virtual std::string name() const = 0;
};

// Combines per-atom verdicts in atom-index order: the first Violated wins,
// otherwise any Unknown, otherwise Holds.
Verdict combine(std::span<const Verdict> per_atom);

}  // namespace verix
