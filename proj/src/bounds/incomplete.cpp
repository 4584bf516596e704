#include "verix/bounds.hpp"

namespace verix {

Verdict check_incomplete(const VerificationQuery& query, Seconds time_limit, const IncompleteOptions& options) {
    const Deadline deadline(time_limit);
    const auto analysis = backsub_propagate(query.net(), query.box());
    if (!analysis) return Holds{};

    bool unknown = false;
    bool timed_out = false;
    for (const AtomicQuery& atom : decompose(query)) {
        if (deadline.expired()) {
            timed_out = true;
            break;
        }
        const SymbolicBound margin =
            bound_output_expression(query.net(), analysis->bounds, atom.output_coeffs, atom.offset);
        if (atom.refuted_by_upper_bound(margin.upper.concretize(analysis->bounds.input).hi)) continue;
        if (auto witness = falsify(query, atom, margin, derive_seed(options.seed, atom.index), options.budget,
                                   deadline)) {
            Verdict verdict{std::move(*witness)};
            check_witness_contract(query, verdict);
            return verdict;
        }
        unknown = true;
    }
    if (timed_out) return Unknown{UnknownReason::Timeout};
    // Bounds too loose to prove and no counterexample found.
    if (unknown) return Unknown{UnknownReason::PrecisionExhausted};
    return Holds{};
}

Verdict IncompleteBackend::check(const VerificationQuery& query, Seconds time_limit) {
    return check_incomplete(query, time_limit, options_);
}

}  // namespace verix
