#include "verix/train.hpp"

#include <algorithm>
#include <cmath>

#include "verix/errors.hpp"
#include "verix/explain.hpp"
#include "verix/rng.hpp"

namespace verix::train {
namespace {

struct Dense {
    Matrix w;
    std::vector<double> b;
    Matrix gw;
    std::vector<double> gb;
};

double normal(SplitMix64& rng) {
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

Network train_classifier(std::span<const io::LabeledSample> data, std::size_t classes, const TrainOptions& options) {
    if (data.empty()) throw InvalidArgument("training set is empty");
    if (classes < 2) throw InvalidArgument("need at least two classes");
    const std::size_t d = data.front().features.size();

    std::vector<std::size_t> sizes{d};
    sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
    sizes.push_back(classes);

    SplitMix64 rng(options.seed);
    std::vector<Dense> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Dense layer{Matrix(sizes[l + 1], sizes[l]), std::vector<double>(sizes[l + 1], 0.0), Matrix(sizes[l + 1], sizes[l]),
                    std::vector<double>(sizes[l + 1], 0.0)};
        const double scale = std::sqrt(2.0 / static_cast<double>(sizes[l]));
        for (double& v : layer.w.data()) v = scale * normal(rng);
        layers.push_back(std::move(layer));
    }

    const std::size_t depth = layers.size();
    std::vector<std::vector<double>> act(depth + 1);
    std::vector<std::vector<double>> delta(depth);

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        const std::vector<std::size_t> order = seeded_permutation(data.size(), options.seed * 1000003 + epoch);
        const double lr = options.learning_rate / (1.0 + 0.05 * static_cast<double>(epoch));
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t stop = std::min(order.size(), start + options.batch_size);
            for (Dense& layer : layers) {
                std::ranges::fill(layer.gw.data(), 0.0);
                std::ranges::fill(layer.gb, 0.0);
            }
            for (std::size_t s = start; s < stop; ++s) {
                const io::LabeledSample& sample = data[order[s]];
                act[0] = sample.features;
                for (std::size_t l = 0; l < depth; ++l) {
                    const Dense& layer = layers[l];
                    act[l + 1].assign(layer.b.begin(), layer.b.end());
                    for (std::size_t r = 0; r < layer.w.rows(); ++r) {
                        for (std::size_t c = 0; c < layer.w.cols(); ++c) act[l + 1][r] += layer.w(r, c) * act[l][c];
                        if (l + 1 < depth) act[l + 1][r] = std::max(0.0, act[l + 1][r]);
                    }
                }
                // softmax cross-entropy gradient
                std::vector<double>& logits = act[depth];
                const double peak = *std::ranges::max_element(logits);
                double total = 0.0;
                delta[depth - 1].resize(classes);
                for (std::size_t k = 0; k < classes; ++k) total += std::exp(logits[k] - peak);
                for (std::size_t k = 0; k < classes; ++k) {
                    delta[depth - 1][k] = std::exp(logits[k] - peak) / total - (k == sample.label ? 1.0 : 0.0);
                }
                for (std::size_t l = depth; l-- > 0;) {
                    Dense& layer = layers[l];
                    for (std::size_t r = 0; r < layer.w.rows(); ++r) {
                        layer.gb[r] += delta[l][r];
                        for (std::size_t c = 0; c < layer.w.cols(); ++c) layer.gw(r, c) += delta[l][r] * act[l][c];
                    }
                    if (l == 0) break;
                    delta[l - 1].assign(layer.w.cols(), 0.0);
                    for (std::size_t c = 0; c < layer.w.cols(); ++c) {
                        if (act[l][c] <= 0.0) continue;
                        for (std::size_t r = 0; r < layer.w.rows(); ++r) delta[l - 1][c] += layer.w(r, c) * delta[l][r];
                    }
                }
            }
            const double scale = lr / static_cast<double>(stop - start);
            for (Dense& layer : layers) {
                auto w = layer.w.data();
                auto gw = layer.gw.data();
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * gw[i] + lr * options.weight_decay * w[i];
                for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= scale * layer.gb[i];
            }
        }
    }

    std::vector<Layer> net_layers;
    for (std::size_t l = 0; l < depth; ++l) {
        net_layers.emplace_back(AffineLayer{layers[l].w, layers[l].b});
        if (l + 1 < depth) net_layers.emplace_back(ReluLayer{layers[l].b.size()});
    }
    return Network(Task::Classification, d, std::move(net_layers));
}

double accuracy(const Network& net, std::span<const io::LabeledSample> data) {
    if (data.empty()) return 0.0;
    std::size_t correct = 0;
    for (const io::LabeledSample& s : data) correct += predict(net, s.features).label == s.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace verix::train
