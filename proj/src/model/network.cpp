#include "verix/model.hpp"

#include <algorithm>
#include <cmath>

#include "verix/errors.hpp"
#include "verix/simd.hpp"

namespace verix {

std::size_t layer_in_dim(const Layer& layer) {
    return std::visit(
        [](const auto& l) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(l)>, AffineLayer>) return l.in_dim();
            else return l.dim;
        },
        layer);
}

std::size_t layer_out_dim(const Layer& layer) {
    return std::visit(
        [](const auto& l) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(l)>, AffineLayer>) return l.out_dim();
            else return l.dim;
        },
        layer);
}

Network::Network(Task task, std::size_t input_dim, std::vector<Layer> layers)
    : task_(task), input_dim_(input_dim), output_dim_(input_dim), layers_(std::move(layers)) {
    if (input_dim_ == 0) throw ModelError("input_dim must be positive");
    if (layers_.empty()) throw ModelError("network has no layers");

    std::size_t dim = input_dim_;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const Layer& layer = layers_[k];
        if (layer_in_dim(layer) != dim) {
            throw ModelError("expects input dimension " + std::to_string(layer_in_dim(layer)) +
                                 " but receives " + std::to_string(dim),
                             k);
        }
        if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            if (affine->bias.size() != affine->out_dim()) {
                throw ModelError("bias length " + std::to_string(affine->bias.size()) +
                                     " does not match weight rows " + std::to_string(affine->out_dim()),
                                 k);
            }
            if (affine->out_dim() == 0) throw ModelError("affine layer has no outputs", k);
            const auto finite = [](double v) { return std::isfinite(v); };
            if (!std::ranges::all_of(affine->weights.data(), finite) || !std::ranges::all_of(affine->bias, finite)) {
                throw ModelError("non-finite parameter", k);
            }
        }
        dim = layer_out_dim(layer);
    }
    output_dim_ = dim;

    if (task_ == Task::Classification && output_dim_ < 2) {
        throw ModelError("classification networks need at least 2 outputs");
    }
    if (task_ == Task::Regression && output_dim_ != 1) {
        throw ModelError("regression networks must have exactly 1 output");
    }
}

std::size_t Network::relu_count() const {
    std::size_t n = 0;
    for (const Layer& layer : layers_) {
        if (const auto* relu = std::get_if<ReluLayer>(&layer)) n += relu->dim;
    }
    return n;
}

namespace {

void apply_layer(const Layer& layer, std::span<const double> in, std::vector<double>& out) {
    if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
        out.resize(affine->out_dim());
        for (std::size_t r = 0; r < affine->out_dim(); ++r) {
            out[r] = simd::dot(affine->weights.row(r), in) + affine->bias[r];
        }
    } else {
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
    }
}

void check_length(const Network& net, std::span<const double> x) {
    if (x.size() != net.input_dim()) {
        throw ModelError("expects input dimension " + std::to_string(net.input_dim()) + " but receives " +
                             std::to_string(x.size()),
                         0);
    }
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> x) {
    check_length(net, x);
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    for (const Layer& layer : net.layers()) {
        apply_layer(layer, current, next);
        std::swap(current, next);
    }
    return current;
}

std::vector<std::vector<double>> forward_trace(const Network& net, std::span<const double> x) {
    check_length(net, x);
    std::vector<std::vector<double>> trace;
    trace.reserve(net.layers().size());
    std::span<const double> current = x;
    for (const Layer& layer : net.layers()) {
        std::vector<double> out;
        apply_layer(layer, current, out);
        trace.push_back(std::move(out));
        current = trace.back();
    }
    return trace;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

Prediction prediction_from_outputs(Task task, std::span<const double> outputs) {
    if (task == Task::Regression) return {Task::Regression, 0, outputs.front()};
    const std::size_t label = argmax(outputs);
    return {Task::Classification, label, outputs[label]};
}

Prediction predict(const Network& net, std::span<const double> x) {
    return prediction_from_outputs(net.task(), forward(net, x));
}

void validate_input(const Network& net, std::span<const double> x) {
    if (x.size() != net.input_dim()) {
        throw InvalidArgument("input has " + std::to_string(x.size()) + " features, network expects " +
                              std::to_string(net.input_dim()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
            throw InvalidArgument("feature " + std::to_string(i) + " = " + std::to_string(x[i]) +
                                  " lies outside [0, 1]");
        }
    }
}

std::size_t Conv2dSpec::out_height() const {
    return (in_height + 2 * padding - kernel_height) / stride + 1;
}

std::size_t Conv2dSpec::out_width() const {
    return (in_width + 2 * padding - kernel_width) / stride + 1;
}

namespace {

void check_conv(const Conv2dSpec& conv) {
    if (conv.stride == 0) throw ModelError("conv2d stride must be positive");
    if (conv.in_channels == 0 || conv.out_channels == 0) throw ModelError("conv2d needs channels");
    if (conv.kernel_height == 0 || conv.kernel_width == 0) throw ModelError("conv2d kernel is empty");
    if (conv.kernel_height > conv.in_height + 2 * conv.padding ||
        conv.kernel_width > conv.in_width + 2 * conv.padding) {
        throw ModelError("conv2d kernel larger than padded input");
    }
    const std::size_t expected =
        conv.out_channels * conv.in_channels * conv.kernel_height * conv.kernel_width;
    if (conv.kernel.size() != expected) throw ModelError("conv2d kernel has wrong element count");
    if (!conv.bias.empty() && conv.bias.size() != conv.out_channels) {
        throw ModelError("conv2d bias must have one entry per output channel");
    }
}

double kernel_at(const Conv2dSpec& conv, std::size_t oc, std::size_t ic, std::size_t ky, std::size_t kx) {
    return conv.kernel[((oc * conv.in_channels + ic) * conv.kernel_height + ky) * conv.kernel_width + kx];
}

}  // namespace

AffineLayer lower_conv2d(const Conv2dSpec& conv) {
    check_conv(conv);
    const std::size_t oh = conv.out_height();
    const std::size_t ow = conv.out_width();
    const std::size_t in_size = conv.in_channels * conv.in_height * conv.in_width;
    AffineLayer layer{Matrix(conv.out_channels * oh * ow, in_size), std::vector<double>(conv.out_channels * oh * ow)};

    for (std::size_t oc = 0; oc < conv.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::size_t row = (oc * oh + oy) * ow + ox;
                layer.bias[row] = conv.bias.empty() ? 0.0 : conv.bias[oc];
                for (std::size_t ic = 0; ic < conv.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < conv.kernel_height; ++ky) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * conv.stride + ky) -
                                                  static_cast<std::ptrdiff_t>(conv.padding);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(conv.in_height)) continue;
                        for (std::size_t kx = 0; kx < conv.kernel_width; ++kx) {
                            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * conv.stride + kx) -
                                                      static_cast<std::ptrdiff_t>(conv.padding);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(conv.in_width)) continue;
                            const std::size_t col = (ic * conv.in_height + static_cast<std::size_t>(iy)) *
                                                        conv.in_width +
                                                    static_cast<std::size_t>(ix);
                            layer.weights(row, col) += kernel_at(conv, oc, ic, ky, kx);
                        }
                    }
                }
            }
        }
    }
    return layer;
}

std::vector<double> conv2d_direct(const Conv2dSpec& conv, std::span<const double> x) {
    check_conv(conv);
    const std::size_t oh = conv.out_height();
    const std::size_t ow = conv.out_width();
    std::vector<double> out(conv.out_channels * oh * ow);
    const auto pixel = [&](std::size_t c, std::ptrdiff_t y, std::ptrdiff_t xx) {
        if (y < 0 || xx < 0 || y >= static_cast<std::ptrdiff_t>(conv.in_height) ||
            xx >= static_cast<std::ptrdiff_t>(conv.in_width)) {
            return 0.0;
        }
        return x[(c * conv.in_height + static_cast<std::size_t>(y)) * conv.in_width + static_cast<std::size_t>(xx)];
    };
    for (std::size_t oc = 0; oc < conv.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = conv.bias.empty() ? 0.0 : conv.bias[oc];
                for (std::size_t ic = 0; ic < conv.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < conv.kernel_height; ++ky) {
                        for (std::size_t kx = 0; kx < conv.kernel_width; ++kx) {
                            const auto y = static_cast<std::ptrdiff_t>(oy * conv.stride + ky) -
                                           static_cast<std::ptrdiff_t>(conv.padding);
                            const auto xx = static_cast<std::ptrdiff_t>(ox * conv.stride + kx) -
                                            static_cast<std::ptrdiff_t>(conv.padding);
                            acc += kernel_at(conv, oc, ic, ky, kx) * pixel(ic, y, xx);
                        }
                    }
                }
                out[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return out;
}

}  // namespace verix
