#include <algorithm>

#include "verix/bnb.hpp"

namespace verix {
namespace {

struct Node {
    std::vector<PhaseConstraint> phases;
};

enum class AtomOutcome { Safe, Violated, Timeout, Precision };

class AtomSearch {
public:
    AtomSearch(const VerificationQuery& query, const AtomicQuery& atom, const BnbOptions& options,
               const Deadline& deadline, BnbStats& stats)
        : query_(query), atom_(atom), options_(options), deadline_(deadline), stats_(stats) {}

    // Bound proof and concrete falsification at the root; nullopt when undecided.
    std::optional<AtomOutcome> root_check(const BacksubResult& root) {
        const SymbolicBound margin =
            bound_output_expression(query_.net(), root.bounds, atom_.output_coeffs, atom_.offset);
        if (atom_.refuted_by_upper_bound(margin.upper.concretize(root.bounds.input).hi)) return AtomOutcome::Safe;
        witness_ = falsify(query_, atom_, margin, derive_seed(options_.root.seed, atom_.index), options_.root.budget,
                           deadline_);
        if (witness_) return AtomOutcome::Violated;
        return std::nullopt;
    }

    AtomOutcome branch(const BacksubResult& root) {
        bool precision_lost = false;
        std::vector<Node> stack;
        stack.push_back({});
        bool at_root = true;
        while (!stack.empty()) {
            if (deadline_.expired() || stats_.nodes >= options_.limits.max_nodes) return AtomOutcome::Timeout;
            Node node = std::move(stack.back());
            stack.pop_back();
            ++stats_.nodes;
            stats_.max_depth = std::max(stats_.max_depth, node.phases.size());

            std::optional<BacksubResult> analysis;
            if (at_root) {
                analysis = root;
                at_root = false;
            } else {
                analysis = backsub_propagate(query_.net(), query_.box(), node.phases);
            }
            if (!analysis) {
                ++stats_.infeasible;
                continue;
            }
            const SymbolicBound bound =
                bound_output_expression(query_.net(), analysis->bounds, atom_.output_coeffs, atom_.offset);
            if (atom_.refuted_by_upper_bound(bound.upper.concretize(analysis->bounds.input).hi)) {
                ++stats_.pruned;
                continue;
            }
            for (const auto& corner : signed_corners(query_.box(), bound)) {
                if (try_point(corner)) return AtomOutcome::Violated;
            }

            const std::vector<UnstableNeuron> unstable = unstable_neurons(query_.net(), analysis->bounds);
            if (!unstable.empty() && !node.phases.empty()) {
                try {
                    const auto relaxed = node_lp_bound(query_, analysis->bounds, bound, node.phases);
                    if (!relaxed) {
                        ++stats_.infeasible;
                        continue;
                    }
                    if (relaxed->upper < -lp::kFeasibilityTolerance) {
                        ++stats_.lp_pruned;
                        continue;
                    }
                    if (try_point(relaxed->point)) return AtomOutcome::Violated;
                } catch (const lp::SolverFailure&) {
                    // Fall through to branching; the relaxation is only an accelerator.
                }
            }
            if (unstable.empty()) {
                ++stats_.leaves;
                try {
                    LeafResult leaf = solve_leaf(query_, atom_, analysis->bounds, node.phases);
                    if (leaf.witness) {
                        witness_ = std::move(leaf.witness);
                        return AtomOutcome::Violated;
                    }
                    if (leaf.feasible && leaf.optimum >= -lp::kFeasibilityTolerance) ++stats_.unconfirmed;
                } catch (const lp::SolverFailure&) {
                    precision_lost = true;
                }
                continue;
            }

            // Widest pre-activation interval; ties keep the lowest (layer, neuron).
            const auto widest = std::ranges::max_element(unstable, [](const UnstableNeuron& a, const UnstableNeuron& b) {
                return (a.upper - a.lower) < (b.upper - b.lower);
            });
            Node active = node;
            active.phases.push_back({widest->layer, widest->neuron, Phase::Active});
            node.phases.push_back({widest->layer, widest->neuron, Phase::Inactive});
            // LIFO: the inactive branch is explored first.
            stack.push_back(std::move(active));
            stack.push_back(std::move(node));
        }
        return precision_lost ? AtomOutcome::Precision : AtomOutcome::Safe;
    }

    std::optional<Violated>& witness() { return witness_; }

private:
    bool try_point(const std::vector<double>& point) {
        if (!atom_.violated_by(forward(query_.net(), point))) return false;
        witness_ = confirm_witness(query_, point);
        return witness_.has_value();
    }

    const VerificationQuery& query_;
    const AtomicQuery& atom_;
    const BnbOptions& options_;
    const Deadline& deadline_;
    BnbStats& stats_;
    std::optional<Violated> witness_;
};

}  // namespace

Verdict check_complete(const VerificationQuery& query, const BnbOptions& options, BnbStats* stats) {
    BnbStats local;
    BnbStats& st = stats != nullptr ? *stats : local;
    st = {};
    const Deadline deadline(options.limits.time_limit);
    const auto root = backsub_propagate(query.net(), query.box());
    if (!root) return Holds{};

    // Cheap root checks on every atom first, so a flip found by sampling is
    // not preceded by full searches over the other atoms.
    const std::vector<AtomicQuery> atoms = decompose(query);
    std::vector<const AtomicQuery*> open;
    for (const AtomicQuery& atom : atoms) {
        AtomSearch search(query, atom, options, deadline, st);
        const auto outcome = search.root_check(*root);
        if (!outcome) {
            open.push_back(&atom);
        } else if (*outcome == AtomOutcome::Violated) {
            Verdict verdict{std::move(*search.witness())};
            check_witness_contract(query, verdict);
            return verdict;
        }
    }

    std::optional<Unknown> unknown;
    for (const AtomicQuery* atom : open) {
        AtomSearch search(query, *atom, options, deadline, st);
        switch (search.branch(*root)) {
            case AtomOutcome::Safe:
                break;
            case AtomOutcome::Violated: {
                Verdict verdict{std::move(*search.witness())};
                check_witness_contract(query, verdict);
                return verdict;
            }
            case AtomOutcome::Timeout:
                return Unknown{UnknownReason::Timeout};
            case AtomOutcome::Precision:
                if (!unknown) unknown = Unknown{UnknownReason::PrecisionExhausted};
                break;
        }
    }
    if (unknown) return *unknown;
    return Holds{};
}

Verdict CompleteBackend::check(const VerificationQuery& query, Seconds time_limit) {
    BnbOptions options = options_;
    options.limits.time_limit = time_limit;
    return check_complete(query, options, &stats_);
}

}  // namespace verix
