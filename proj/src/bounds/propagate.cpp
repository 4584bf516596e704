#include <algorithm>
#include <map>

#include "verix/bounds.hpp"
#include "verix/errors.hpp"
#include "verix/simd.hpp"

namespace verix {

double LinearExpr::evaluate(std::span<const double> x) const { return simd::dot(coeffs, x) + constant; }

simd::Range LinearExpr::concretize(const IntervalVector& box) const {
    simd::Range r = simd::interval_dot(coeffs, box.lower, box.upper);
    r.lo += constant;
    r.hi += constant;
    return r;
}

IntervalVector to_intervals(const BoxBounds& box) { return {box.lower, box.upper}; }

ReluRelaxation relax_relu(double l, double u) {
    if (u <= 0.0) return {0.0, 0.0, 0.0};
    if (l >= 0.0) return {1.0, 0.0, 1.0};
    const double slope = u / (u - l);
    // Minimal-area lower line; u == |l| resolves to the identity.
    return {slope, -slope * l, u >= -l ? 1.0 : 0.0};
}

namespace {

using PhaseMap = std::map<std::size_t, std::vector<std::pair<std::size_t, Phase>>>;

PhaseMap group_phases(const Network& net, std::span<const PhaseConstraint> phases) {
    PhaseMap grouped;
    std::map<std::pair<std::size_t, std::size_t>, Phase> seen;
    for (const PhaseConstraint& pc : phases) {
        if (pc.layer >= net.layers().size() || !std::holds_alternative<ReluLayer>(net.layers()[pc.layer])) {
            throw InvalidArgument("phase constraint on non-ReLU layer " + std::to_string(pc.layer));
        }
        if (pc.neuron >= layer_in_dim(net.layers()[pc.layer])) {
            throw InvalidArgument("phase constraint neuron " + std::to_string(pc.neuron) + " out of range");
        }
        auto [it, inserted] = seen.emplace(std::pair{pc.layer, pc.neuron}, pc.phase);
        if (!inserted) {
            if (it->second != pc.phase) throw InvalidArgument("neuron assigned two phases");
            continue;
        }
        grouped[pc.layer].emplace_back(pc.neuron, pc.phase);
    }
    return grouped;
}

// Intersects the ReLU input range with the phase half-lines. False if empty.
bool apply_phases(const PhaseMap& phases, std::size_t layer, IntervalVector& pre) {
    const auto it = phases.find(layer);
    if (it == phases.end()) return true;
    for (const auto& [neuron, phase] : it->second) {
        if (phase == Phase::Active) pre.lower[neuron] = std::max(pre.lower[neuron], 0.0);
        else pre.upper[neuron] = std::min(pre.upper[neuron], 0.0);
        if (pre.lower[neuron] > pre.upper[neuron]) return false;
    }
    return true;
}

IntervalVector interval_affine(const AffineLayer& layer, const IntervalVector& in) {
    IntervalVector out{std::vector<double>(layer.out_dim()), std::vector<double>(layer.out_dim())};
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
        const simd::Range range = simd::interval_dot(layer.weights.row(r), in.lower, in.upper);
        out.lower[r] = range.lo + layer.bias[r];
        out.upper[r] = range.hi + layer.bias[r];
    }
    return out;
}

IntervalVector interval_relu(const IntervalVector& pre) {
    IntervalVector out = pre;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        out.lower[i] = std::max(out.lower[i], 0.0);
        out.upper[i] = std::max(out.upper[i], 0.0);
    }
    return out;
}

IntervalVector& pre_activation_slot(NeuronBounds& nb, std::size_t layer) {
    return layer == 0 ? nb.input : nb.layers[layer - 1];
}

// Rows of `coeffs` are linear forms over the output of layer `count - 1`
// (the input when count == 0). Substitutes layers count-1 .. 0 so the rows
// become forms over the network input, choosing each ReLU relaxation so the
// result is an upper (or lower) bound.
void back_substitute(const Network& net, const NeuronBounds& nb, Matrix& coeffs, std::vector<double>& constants,
                     std::size_t count, bool upper) {
    for (std::size_t j = count; j-- > 0;) {
        const Layer& layer = net.layers()[j];
        if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            Matrix next(coeffs.rows(), affine->in_dim());
            for (std::size_t r = 0; r < coeffs.rows(); ++r) {
                const auto row = coeffs.row(r);
                auto out = next.row(r);
                constants[r] += simd::dot(row, affine->bias);
                for (std::size_t t = 0; t < row.size(); ++t) {
                    if (row[t] != 0.0) simd::axpy(row[t], affine->weights.row(t), out);
                }
            }
            coeffs = std::move(next);
        } else {
            const IntervalVector& pre = nb.pre_activation(j);
            for (std::size_t r = 0; r < coeffs.rows(); ++r) {
                auto row = coeffs.row(r);
                for (std::size_t t = 0; t < row.size(); ++t) {
                    const double a = row[t];
                    if (a == 0.0) continue;
                    const ReluRelaxation rel = relax_relu(pre.lower[t], pre.upper[t]);
                    if ((a >= 0.0) == upper) {
                        row[t] = a * rel.upper_slope;
                        constants[r] += a * rel.upper_offset;
                    } else {
                        row[t] = a * rel.lower_slope;
                    }
                }
            }
        }
    }
}

std::vector<LinearExpr> to_exprs(const Matrix& coeffs, const std::vector<double>& constants) {
    std::vector<LinearExpr> exprs;
    exprs.reserve(coeffs.rows());
    for (std::size_t r = 0; r < coeffs.rows(); ++r) {
        const auto row = coeffs.row(r);
        exprs.push_back({std::vector<double>(row.begin(), row.end()), constants[r]});
    }
    return exprs;
}

}  // namespace

std::optional<NeuronBounds> interval_propagate(const Network& net, const BoxBounds& box,
                                               std::span<const PhaseConstraint> phases) {
    if (box.size() != net.input_dim()) throw InvalidArgument("box dimension does not match the network");
    const PhaseMap grouped = group_phases(net, phases);
    NeuronBounds nb;
    nb.input = to_intervals(box);
    nb.layers.reserve(net.layers().size());
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const Layer& layer = net.layers()[k];
        if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            nb.layers.push_back(interval_affine(*affine, k == 0 ? nb.input : nb.layers.back()));
        } else {
            IntervalVector& pre = pre_activation_slot(nb, k);
            if (!apply_phases(grouped, k, pre)) return std::nullopt;
            nb.layers.push_back(interval_relu(pre));
        }
    }
    return nb;
}

std::optional<BacksubResult> backsub_propagate(const Network& net, const BoxBounds& box,
                                               std::span<const PhaseConstraint> phases) {
    if (box.size() != net.input_dim()) throw InvalidArgument("box dimension does not match the network");
    const PhaseMap grouped = group_phases(net, phases);
    BacksubResult result;
    NeuronBounds& nb = result.bounds;
    nb.input = to_intervals(box);
    nb.layers.reserve(net.layers().size());

    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const Layer& layer = net.layers()[k];
        if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            IntervalVector bounds = interval_affine(*affine, k == 0 ? nb.input : nb.layers.back());
            if (k > 0) {
                Matrix up = affine->weights;
                Matrix lo = affine->weights;
                std::vector<double> up_c = affine->bias;
                std::vector<double> lo_c = affine->bias;
                back_substitute(net, nb, up, up_c, k, true);
                back_substitute(net, nb, lo, lo_c, k, false);
                for (std::size_t r = 0; r < affine->out_dim(); ++r) {
                    const double hi = simd::interval_dot(up.row(r), nb.input.lower, nb.input.upper).hi + up_c[r];
                    const double lw = simd::interval_dot(lo.row(r), nb.input.lower, nb.input.upper).lo + lo_c[r];
                    bounds.upper[r] = std::min(bounds.upper[r], hi);
                    bounds.lower[r] = std::max(bounds.lower[r], lw);
                }
            }
            nb.layers.push_back(std::move(bounds));
        } else {
            IntervalVector& pre = pre_activation_slot(nb, k);
            if (!apply_phases(grouped, k, pre)) return std::nullopt;
            nb.layers.push_back(interval_relu(pre));
        }
    }

    const std::size_t m = net.output_dim();
    Matrix up(m, m);
    for (std::size_t i = 0; i < m; ++i) up(i, i) = 1.0;
    Matrix lo = up;
    std::vector<double> up_c(m, 0.0);
    std::vector<double> lo_c(m, 0.0);
    back_substitute(net, nb, up, up_c, net.layers().size(), true);
    back_substitute(net, nb, lo, lo_c, net.layers().size(), false);
    std::vector<LinearExpr> uppers = to_exprs(up, up_c);
    std::vector<LinearExpr> lowers = to_exprs(lo, lo_c);
    for (std::size_t i = 0; i < m; ++i) result.outputs.push_back({std::move(lowers[i]), std::move(uppers[i])});
    return result;
}

SymbolicBound bound_output_expression(const Network& net, const NeuronBounds& bounds,
                                      std::span<const double> out_coeffs, double offset) {
    if (out_coeffs.size() != net.output_dim()) throw InvalidArgument("output expression has wrong length");
    Matrix up(1, out_coeffs.size());
    std::ranges::copy(out_coeffs, up.row(0).begin());
    Matrix lo = up;
    std::vector<double> up_c{offset};
    std::vector<double> lo_c{offset};
    back_substitute(net, bounds, up, up_c, net.layers().size(), true);
    back_substitute(net, bounds, lo, lo_c, net.layers().size(), false);
    return {to_exprs(lo, lo_c).front(), to_exprs(up, up_c).front()};
}

std::vector<SymbolicBound> pre_activation_expressions(const Network& net, const NeuronBounds& bounds,
                                                      std::span<const PhaseConstraint> phases) {
    std::vector<SymbolicBound> out(phases.size());
    std::map<std::size_t, std::vector<std::size_t>> by_layer;
    for (std::size_t c = 0; c < phases.size(); ++c) by_layer[phases[c].layer].push_back(c);
    for (const auto& [layer, members] : by_layer) {
        const std::size_t width = layer_in_dim(net.layers()[layer]);
        Matrix up(members.size(), width);
        for (std::size_t r = 0; r < members.size(); ++r) up(r, phases[members[r]].neuron) = 1.0;
        Matrix lo = up;
        std::vector<double> up_c(members.size(), 0.0);
        std::vector<double> lo_c(members.size(), 0.0);
        back_substitute(net, bounds, up, up_c, layer, true);
        back_substitute(net, bounds, lo, lo_c, layer, false);
        std::vector<LinearExpr> uppers = to_exprs(up, up_c);
        std::vector<LinearExpr> lowers = to_exprs(lo, lo_c);
        for (std::size_t r = 0; r < members.size(); ++r) out[members[r]] = {std::move(lowers[r]), std::move(uppers[r])};
    }
    return out;
}

std::vector<UnstableNeuron> unstable_neurons(const Network& net, const NeuronBounds& bounds) {
    std::vector<UnstableNeuron> out;
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        if (!std::holds_alternative<ReluLayer>(net.layers()[k])) continue;
        const IntervalVector& pre = bounds.pre_activation(k);
        for (std::size_t i = 0; i < pre.size(); ++i) {
            if (pre.lower[i] < 0.0 && pre.upper[i] > 0.0) out.push_back({k, i, pre.lower[i], pre.upper[i]});
        }
    }
    return out;
}

}  // namespace verix
