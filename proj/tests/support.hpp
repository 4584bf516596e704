#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "verix/model.hpp"
#include "verix/rng.hpp"

namespace verix::testing {

inline double uniform(SplitMix64& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline AffineLayer affine(std::vector<std::vector<double>> rows, std::vector<double> bias) {
    return AffineLayer{Matrix::from_rows(rows), std::move(bias)};
}

inline AffineLayer random_affine(SplitMix64& rng, std::size_t out, std::size_t in, double scale = 1.0) {
    Matrix w(out, in);
    std::vector<double> b(out);
    for (std::size_t r = 0; r < out; ++r) {
        for (std::size_t c = 0; c < in; ++c) w(r, c) = uniform(rng, -scale, scale);
        b[r] = uniform(rng, -0.5 * scale, 0.5 * scale);
    }
    return AffineLayer{std::move(w), std::move(b)};
}

// Dense ReLU net with the given widths: widths.front() inputs, widths.back() outputs.
inline Network random_network(SplitMix64& rng, const std::vector<std::size_t>& widths,
                              Task task = Task::Classification) {
    std::vector<Layer> layers;
    for (std::size_t k = 1; k < widths.size(); ++k) {
        layers.emplace_back(random_affine(rng, widths[k], widths[k - 1]));
        if (k + 1 < widths.size()) layers.emplace_back(ReluLayer{widths[k]});
    }
    return Network(task, widths.front(), std::move(layers));
}

inline std::vector<double> random_input(SplitMix64& rng, std::size_t d) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform();
    return x;
}

// f(x) = ReLU(x), one input, regression.
inline Network relu_identity() {
    return Network(Task::Regression, 1, {affine({{1.0}}, {0.0}), ReluLayer{1}});
}

// z = (x, 1 - x).
inline Network two_logit_line() {
    return Network(Task::Classification, 1, {affine({{1.0}, {-1.0}}, {0.0, 1.0})});
}

}  // namespace verix::testing
