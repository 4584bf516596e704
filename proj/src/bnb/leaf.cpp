#include <algorithm>
#include <cmath>
#include <map>

#include "verix/bnb.hpp"
#include "verix/errors.hpp"
#include "verix/simd.hpp"

namespace verix {

LeafEncoding encode_leaf(const VerificationQuery& query, const AtomicQuery& atom, const NeuronBounds& bounds,
                         std::span<const PhaseConstraint> phases) {
    const Network& net = query.net();
    const BoxBounds& box = query.box();
    LeafEncoding enc;
    enc.free = query.partition().free;
    const std::size_t nf = enc.free.size();

    std::map<std::pair<std::size_t, std::size_t>, Phase> assigned;
    for (const PhaseConstraint& pc : phases) assigned[{pc.layer, pc.neuron}] = pc.phase;

    // Affine form of every neuron over the free inputs: forms.row(i) . v + consts[i].
    Matrix forms(net.input_dim(), nf);
    std::vector<double> consts = query.center();
    for (std::size_t v = 0; v < nf; ++v) {
        forms(enc.free[v], v) = 1.0;
        consts[enc.free[v]] = 0.0;
    }

    lp::LinearProgram& program = enc.program;
    for (std::size_t v = 0; v < nf; ++v) {
        program.lower.push_back(box.lower[enc.free[v]]);
        program.upper.push_back(box.upper[enc.free[v]]);
    }

    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const Layer& layer = net.layers()[k];
        if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            Matrix next(affine->out_dim(), nf);
            std::vector<double> next_consts(affine->out_dim());
            for (std::size_t r = 0; r < affine->out_dim(); ++r) {
                const auto w = affine->weights.row(r);
                next_consts[r] = simd::dot(w, consts) + affine->bias[r];
                for (std::size_t t = 0; t < w.size(); ++t) {
                    if (w[t] != 0.0 && nf > 0) simd::axpy(w[t], forms.row(t), next.row(r));
                }
            }
            forms = std::move(next);
            consts = std::move(next_consts);
            continue;
        }
        const IntervalVector& pre = bounds.pre_activation(k);
        for (std::size_t i = 0; i < forms.rows(); ++i) {
            const auto it = assigned.find({k, i});
            Phase phase;
            if (it != assigned.end()) {
                phase = it->second;
                lp::Constraint c;
                c.coeffs.assign(forms.row(i).begin(), forms.row(i).end());
                if (phase == Phase::Active) {
                    // form + const >= 0
                    for (double& a : c.coeffs) a = -a;
                    c.rhs = consts[i];
                } else {
                    c.rhs = -consts[i];
                }
                program.constraints.push_back(std::move(c));
            } else if (pre.lower[i] >= 0.0) {
                phase = Phase::Active;
            } else if (pre.upper[i] <= 0.0) {
                phase = Phase::Inactive;
            } else {
                throw InvalidArgument("leaf encoding: neuron (" + std::to_string(k) + ", " + std::to_string(i) +
                                      ") is unstable and unphased");
            }
            if (phase == Phase::Inactive) {
                std::ranges::fill(forms.row(i), 0.0);
                consts[i] = 0.0;
            }
        }
    }

    program.objective.assign(nf, 0.0);
    enc.objective_offset = atom.offset;
    for (std::size_t j = 0; j < forms.rows(); ++j) {
        const double g = atom.output_coeffs[j];
        if (g == 0.0) continue;
        if (nf > 0) simd::axpy(g, forms.row(j), program.objective);
        enc.objective_offset += g * consts[j];
    }
    program.sense = lp::Sense::Maximize;
    return enc;
}

LeafResult solve_leaf(const VerificationQuery& query, const AtomicQuery& atom, const NeuronBounds& bounds,
                      std::span<const PhaseConstraint> phases) {
    const LeafEncoding enc = encode_leaf(query, atom, bounds, phases);
    const lp::Solution solution = lp::solve(enc.program);
    LeafResult result;
    const auto* opt = std::get_if<lp::Optimal>(&solution);
    if (opt == nullptr) {
        if (std::holds_alternative<lp::Unbounded>(solution)) throw lp::SolverFailure("leaf LP unbounded");
        return result;
    }
    result.feasible = true;
    result.optimum = opt->value + enc.objective_offset;
    if (result.optimum < -lp::kFeasibilityTolerance) return result;

    std::vector<double> point = query.center();
    for (std::size_t v = 0; v < enc.free.size(); ++v) point[enc.free[v]] = opt->point[v];
    result.witness = confirm_witness(query, point);
    // An optimum on the decision facet may round to the wrong side; nudge
    // along the objective gradient.
    for (double step : {1e-9, 1e-7, 1e-5}) {
        if (result.witness) break;
        std::vector<double> nudged = point;
        for (std::size_t v = 0; v < enc.free.size(); ++v) {
            const double g = enc.program.objective[v];
            if (g != 0.0) nudged[enc.free[v]] += std::copysign(step, g);
        }
        result.witness = confirm_witness(query, nudged);
    }
    return result;
}

std::optional<NodeBound> node_lp_bound(const VerificationQuery& query, const NeuronBounds& bounds,
                                       const SymbolicBound& margin, std::span<const PhaseConstraint> phases) {
    const std::vector<std::size_t>& free = query.partition().free;
    const std::vector<double>& x = query.center();
    const BoxBounds& box = query.box();

    // Restricts an input-space expression to the free variables; fixed inputs fold into the constant.
    auto restrict = [&](const LinearExpr& e, std::vector<double>& coeffs) {
        double constant = e.constant;
        for (std::size_t i : query.partition().fixed) constant += e.coeffs[i] * x[i];
        coeffs.resize(free.size());
        for (std::size_t v = 0; v < free.size(); ++v) coeffs[v] = e.coeffs[free[v]];
        return constant;
    };

    lp::LinearProgram program;
    for (std::size_t i : free) {
        program.lower.push_back(box.lower[i]);
        program.upper.push_back(box.upper[i]);
    }
    const std::vector<SymbolicBound> cuts = pre_activation_expressions(query.net(), bounds, phases);
    for (std::size_t c = 0; c < phases.size(); ++c) {
        lp::Constraint row;
        if (phases[c].phase == Phase::Active) {
            // upper(x) >= 0
            const double k = restrict(cuts[c].upper, row.coeffs);
            for (double& a : row.coeffs) a = -a;
            row.rhs = k;
        } else {
            // lower(x) <= 0
            row.rhs = -restrict(cuts[c].lower, row.coeffs);
        }
        program.constraints.push_back(std::move(row));
    }
    const double offset = restrict(margin.upper, program.objective);
    program.sense = lp::Sense::Maximize;

    const lp::Solution solution = lp::solve(program);
    if (std::holds_alternative<lp::Infeasible>(solution)) return std::nullopt;
    const auto* opt = std::get_if<lp::Optimal>(&solution);
    if (opt == nullptr) throw lp::SolverFailure("node LP unbounded");
    NodeBound result{opt->value + offset, x};
    for (std::size_t v = 0; v < free.size(); ++v) result.point[free[v]] = opt->point[v];
    return result;
}

}  // namespace verix
