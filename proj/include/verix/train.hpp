#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "verix/io.hpp"
#include "verix/model.hpp"

namespace verix::train {

struct TrainOptions {
    std::vector<std::size_t> hidden{20, 10};
    std::size_t epochs = 40;
    std::size_t batch_size = 16;
    double learning_rate = 0.05;
    double weight_decay = 1e-4;
    std::uint64_t seed = 1;
};

// Minibatch SGD on softmax cross-entropy. Fully deterministic for a seed.
Network train_classifier(std::span<const io::LabeledSample> data, std::size_t classes, const TrainOptions& options);

double accuracy(const Network& net, std::span<const io::LabeledSample> data);

}  // namespace verix::train
