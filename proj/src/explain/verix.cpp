#include <algorithm>
#include <chrono>

#include "verix/errors.hpp"
#include "verix/explain.hpp"

namespace verix {

OutputProperty property_for(const Network& net, const Prediction& prediction, std::optional<double> delta) {
    if (net.task() == Task::Classification) return ClassificationProperty{prediction.label};
    if (!delta) throw InvalidArgument("regression explanations need a discrepancy delta");
    return RegressionProperty{prediction.value, *delta};
}

Explanation verix(const Network& net, std::span<const double> x, const VerixOptions& options,
                  VerificationBackend& backend) {
    validate_input(net, x);
    Explanation result;
    result.params = {options.epsilon, options.norm, options.delta, backend.name(), options.traversal};
    if (net.task() == Task::Classification) result.params.delta.reset();
    result.prediction = predict(net, x);
    const OutputProperty property = property_for(net, result.prediction, options.delta);
    result.order = traversal_order(net, x, options.traversal).order;

    for (std::size_t feature : result.order) {
        const VerificationQuery query =
            build_query(net, x, result.irrelevant, feature, options.epsilon, property, options.norm);
        const auto start = std::chrono::steady_clock::now();
        Verdict verdict = backend.check(query, options.per_query_time_limit);
        const double elapsed = Seconds(std::chrono::steady_clock::now() - start).count();
        ++result.backend_calls;
        check_witness_contract(query, verdict);

        result.steps.push_back({feature, kind_of(verdict), elapsed});
        if (std::holds_alternative<Holds>(verdict)) {
            result.irrelevant.push_back(feature);
        } else if (auto* violated = std::get_if<Violated>(&verdict)) {
            result.explanation.push_back(feature);
            Prediction p = prediction_from_outputs(net.task(), violated->outputs);
            result.counterfactuals.push_back(
                {feature, std::move(violated->witness), std::move(violated->outputs), p});
        } else {
            result.explanation.push_back(feature);
            result.unknown.push_back(feature);
        }
    }
    return result;
}

EpsilonMap epsilon_sweep(const Network& net, std::span<const double> x, std::span<const double> epsilons,
                         const VerixOptions& base, VerificationBackend& backend) {
    if (epsilons.empty()) throw InvalidArgument("epsilon sweep needs at least one value");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw InvalidArgument("sweep epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw InvalidArgument("sweep epsilons must be strictly descending");
    }
    EpsilonMap map;
    map.epsilons.assign(epsilons.begin(), epsilons.end());
    map.smallest_irrelevant.assign(x.size(), std::nullopt);
    for (double eps : epsilons) {
        VerixOptions options = base;
        options.epsilon = eps;
        Explanation run = verix(net, x, options, backend);
        for (std::size_t i : run.irrelevant) map.smallest_irrelevant[i] = eps;
        map.runs.push_back(std::move(run));
    }
    return map;
}

}  // namespace verix
