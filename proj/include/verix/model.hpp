#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "verix/matrix.hpp"

namespace verix {

enum class Task { Classification, Regression };

struct AffineLayer {
    Matrix weights;  // out x in
    std::vector<double> bias;

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }
    bool operator==(const AffineLayer&) const = default;
};

struct ReluLayer {
    std::size_t dim = 0;
    bool operator==(const ReluLayer&) const = default;
};

using Layer = std::variant<AffineLayer, ReluLayer>;

std::size_t layer_in_dim(const Layer& layer);
std::size_t layer_out_dim(const Layer& layer);

// Immutable feed-forward affine/ReLU network. All invariants are checked at
// construction; a constructed Network is always well-formed.
class Network {
public:
    Network(Task task, std::size_t input_dim, std::vector<Layer> layers);

    Task task() const { return task_; }
    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return output_dim_; }
    const std::vector<Layer>& layers() const { return layers_; }

    // Number of ReLU neurons across all layers.
    std::size_t relu_count() const;

    bool operator==(const Network&) const = default;

private:
    Task task_;
    std::size_t input_dim_;
    std::size_t output_dim_;
    std::vector<Layer> layers_;
};

// Classification: label is the argmax (lowest index on ties), value is the
// winning logit. Regression: label is 0, value is the scalar output.
struct Prediction {
    Task task = Task::Classification;
    std::size_t label = 0;
    double value = 0.0;

    bool operator==(const Prediction&) const = default;
};

std::vector<double> forward(const Network& net, std::span<const double> x);

// Output of every layer, in order; back() equals forward(net, x).
std::vector<std::vector<double>> forward_trace(const Network& net, std::span<const double> x);

Prediction predict(const Network& net, std::span<const double> x);
Prediction prediction_from_outputs(Task task, std::span<const double> outputs);
std::size_t argmax(std::span<const double> values);

// Throws InvalidArgument unless x has the network's input size and every
// component lies in [0, 1].
void validate_input(const Network& net, std::span<const double> x);

// Dense lowering of a 2-D convolution. Input and output are laid out
// channel-major ([c][y][x]).
struct Conv2dSpec {
    std::size_t in_channels = 1;
    std::size_t in_height = 0;
    std::size_t in_width = 0;
    std::size_t out_channels = 1;
    std::size_t kernel_height = 0;
    std::size_t kernel_width = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    // [out_channel][in_channel][ky][kx], flattened.
    std::vector<double> kernel;
    std::vector<double> bias;  // per output channel; empty means zero

    std::size_t out_height() const;
    std::size_t out_width() const;
};

AffineLayer lower_conv2d(const Conv2dSpec& conv);

// Direct (non-lowered) convolution, used to cross-check the lowering.
std::vector<double> conv2d_direct(const Conv2dSpec& conv, std::span<const double> x);

Network load_network(const std::filesystem::path& path);
Network parse_network(const std::string& json_text, const std::string& source = "<memory>");
std::string network_to_json(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

}  // namespace verix
