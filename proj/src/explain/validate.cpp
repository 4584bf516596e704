#include <algorithm>
#include <cmath>

#include "verix/explain.hpp"
#include "verix/rng.hpp"

namespace verix {
namespace {

std::vector<std::size_t> irrelevant_before(const Explanation& explanation, std::size_t feature) {
    std::vector<std::size_t> b;
    for (const StepRecord& step : explanation.steps) {
        if (step.feature == feature) break;
        if (step.verdict == VerdictKind::Holds) b.push_back(step.feature);
    }
    return b;
}

bool deviates_only_on(std::span<const double> x, std::span<const double> m, std::span<const std::size_t> allowed,
                      double radius) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dev = std::abs(m[i] - x[i]);
        if (dev == 0.0) continue;
        if (std::ranges::find(allowed, i) == allowed.end() || dev > radius) return false;
    }
    return true;
}

}  // namespace

bool counterfactual_valid(const Network& net, std::span<const double> x, const Explanation& explanation,
                          const Counterfactual& cf, std::span<const std::size_t> irrelevant_at_step, double slack) {
    if (cf.input.size() != x.size()) return false;
    std::vector<std::size_t> allowed(irrelevant_at_step.begin(), irrelevant_at_step.end());
    allowed.push_back(cf.feature);
    if (!deviates_only_on(x, cf.input, allowed, explanation.params.epsilon + slack)) return false;
    if (std::ranges::any_of(cf.input, [](double v) { return v < 0.0 || v > 1.0; })) return false;
    const std::vector<double> out = forward(net, cf.input);
    const OutputProperty property = property_for(net, explanation.prediction, explanation.params.delta);
    return violates(property, out);
}

ValidationReport validate_explanation(const Network& net, std::span<const double> x, const Explanation& explanation,
                                      std::size_t samples, std::uint64_t seed) {
    ValidationReport report;
    const OutputProperty property = property_for(net, explanation.prediction, explanation.params.delta);
    const double eps = explanation.params.epsilon;
    const std::vector<std::size_t>& free = explanation.irrelevant;

    std::vector<double> lo(x.begin(), x.end());
    std::vector<double> hi(x.begin(), x.end());
    for (std::size_t i : free) {
        lo[i] = std::max(0.0, x[i] - eps);
        hi[i] = std::min(1.0, x[i] + eps);
    }

    SplitMix64 rng(seed);
    std::vector<double> point(x.begin(), x.end());
    const auto draw_in_box = [&](std::vector<double>& p) {
        for (std::size_t i : free) p[i] = lo[i] + rng.uniform() * (hi[i] - lo[i]);
    };

    for (std::size_t s = 0; s < samples; ++s) {
        draw_in_box(point);
        ++report.random_samples;
        if (violates(property, forward(net, point))) ++report.random_violations;
    }

    // Directed probes: counterfactuals the claimed irrelevant set would admit.
    constexpr std::size_t kJitter = 16;
    for (const Counterfactual& cf : explanation.counterfactuals) {
        if (cf.input.size() != x.size() || !deviates_only_on(x, cf.input, free, eps + 1e-9)) continue;
        std::vector<double> probe = cf.input;
        for (std::size_t j = 0; j <= kJitter; ++j) {
            if (j > 0) {
                probe = cf.input;
                for (std::size_t i : free) {
                    probe[i] = std::clamp(cf.input[i] + (rng.uniform() - 0.5) * 0.02 * eps, lo[i], hi[i]);
                }
            }
            ++report.directed_samples;
            if (violates(property, forward(net, probe))) ++report.directed_violations;
        }
    }

    for (const Counterfactual& cf : explanation.counterfactuals) {
        ++report.counterfactuals_checked;
        if (!counterfactual_valid(net, x, explanation, cf, irrelevant_before(explanation, cf.feature))) {
            ++report.counterfactual_failures;
        }
    }
    return report;
}

}  // namespace verix
