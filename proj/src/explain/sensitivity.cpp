#include <algorithm>
#include <numeric>

#include "verix/explain.hpp"
#include "verix/rng.hpp"

namespace verix {

std::vector<double> sensitivity(const Network& net, std::span<const double> x, const Transform& transform) {
    const std::vector<double> base = forward(net, x);
    const std::size_t c = prediction_from_outputs(net.task(), base).label;
    std::vector<double> perturbed(x.begin(), x.end());
    std::vector<double> result(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        perturbed[i] = transform.apply(x[i]);
        result[i] = base[c] - forward(net, perturbed)[c];
        perturbed[i] = x[i];
    }
    return result;
}

std::vector<std::size_t> seeded_permutation(std::size_t d, std::uint64_t seed) {
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(seed);
    for (std::size_t i = d; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    return order;
}

Traversal traversal_order(const Network& net, std::span<const double> x, const TraversalSpec& spec) {
    const std::size_t d = x.size();
    Traversal t{{}, spec};
    switch (spec.kind) {
        case TraversalKind::Sequential:
            t.order.resize(d);
            std::iota(t.order.begin(), t.order.end(), std::size_t{0});
            break;
        case TraversalKind::Random:
            t.order = seeded_permutation(d, spec.seed);
            break;
        case TraversalKind::Sensitivity: {
            std::vector<double> key = sensitivity(net, x, spec.transform);
            if (spec.ranking == SensitivityRanking::Magnitude) {
                for (double& k : key) k = std::abs(k);
            }
            t.order.resize(d);
            std::iota(t.order.begin(), t.order.end(), std::size_t{0});
            // Least to most sensitive; stable sort keeps the lowest index first on ties.
            std::ranges::stable_sort(t.order, [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
            break;
        }
    }
    return t;
}

}  // namespace verix
