#include <algorithm>

#include "verix/bounds.hpp"
#include "verix/rng.hpp"

namespace verix {
namespace {

using SplitMix = SplitMix64;

struct Search {
    const VerificationQuery& query;
    const AtomicQuery& atom;
    std::vector<double> best;
    double best_margin = -std::numeric_limits<double>::infinity();
    std::optional<Violated> found;

    // Evaluates a point and returns its margin; sets `found` on a confirmed witness.
    double probe(const std::vector<double>& point) {
        const std::vector<double> out = forward(query.net(), point);
        if (atom.violated_by(out)) found = confirm_witness(query, point);
        const double m = atom.margin(out);
        if (m > best_margin) {
            best_margin = m;
            best = point;
        }
        return m;
    }
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    SplitMix mix(root ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    return mix.next();
}

std::vector<std::vector<double>> signed_corners(const BoxBounds& box, const SymbolicBound& margin_bound) {
    std::vector<std::vector<double>> corners;
    for (const LinearExpr* expr : {&margin_bound.upper, &margin_bound.lower}) {
        std::vector<double> corner(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            corner[i] = expr->coeffs[i] > 0.0 ? box.upper[i] : box.lower[i];
        }
        if (std::ranges::find(corners, corner) == corners.end()) corners.push_back(std::move(corner));
    }
    return corners;
}

std::optional<Violated> falsify(const VerificationQuery& query, const AtomicQuery& atom,
                                const SymbolicBound& margin_bound, std::uint64_t seed, const FalsifierBudget& budget,
                                const Deadline& deadline) {
    const BoxBounds& box = query.box();
    const std::vector<std::size_t>& free = query.partition().free;
    Search search{query, atom, {}, -std::numeric_limits<double>::infinity(), std::nullopt};

    search.probe(query.center());
    if (search.found) return search.found;
    for (const auto& corner : signed_corners(box, margin_bound)) {
        search.probe(corner);
        if (search.found) return search.found;
    }
    if (free.empty()) return std::nullopt;

    SplitMix rng(seed);
    std::vector<double> point = query.center();
    for (std::size_t s = 0; s < budget.random_samples; ++s) {
        if ((s & 63) == 0 && deadline.expired()) return std::nullopt;
        for (std::size_t i : free) point[i] = box.lower[i] + rng.uniform() * (box.upper[i] - box.lower[i]);
        search.probe(point);
        if (search.found) return search.found;
    }

    // Coordinate-wise greedy ascent on the violation margin.
    std::vector<double> current = search.best;
    double current_margin = search.best_margin;
    for (std::size_t step = 0; step < budget.greedy_steps; ++step) {
        if (deadline.expired()) return std::nullopt;
        std::vector<double> step_best;
        double step_margin = current_margin;
        for (std::size_t i : free) {
            const double candidates[] = {box.lower[i], box.upper[i], 0.5 * (current[i] + box.lower[i]),
                                         0.5 * (current[i] + box.upper[i])};
            for (double v : candidates) {
                if (v == current[i]) continue;
                std::vector<double> trial = current;
                trial[i] = v;
                const double m = search.probe(trial);
                if (search.found) return search.found;
                if (m > step_margin) {
                    step_margin = m;
                    step_best = std::move(trial);
                }
            }
        }
        if (step_best.empty()) break;
        current = std::move(step_best);
        current_margin = step_margin;
    }
    return std::nullopt;
}

}  // namespace verix
