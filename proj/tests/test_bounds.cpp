#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "verix/bounds.hpp"
#include "verix/oracle.hpp"

using namespace verix;
using testing::affine;

namespace {

BoxBounds box_of(std::vector<double> lo, std::vector<double> hi) { return BoxBounds{std::move(lo), std::move(hi)}; }

BoxBounds random_box(SplitMix64& rng, std::size_t d) {
    BoxBounds b;
    for (std::size_t i = 0; i < d; ++i) {
        const double c = rng.uniform(), r = testing::uniform(rng, 0.0, 0.4);
        b.lower.push_back(std::max(0.0, c - r));
        b.upper.push_back(std::min(1.0, c + r));
    }
    return b;
}

bool within(const IntervalVector& iv, const std::vector<double>& v, double tol = 1e-9) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] < iv.lower[i] - tol || v[i] > iv.upper[i] + tol) return false;
    return true;
}

}  // namespace

TEST_CASE("interval: single difference neuron") {
    const Network net(Task::Regression, 2, {affine({{1, -1}}, {0}), ReluLayer{1}});
    const auto nb = interval_propagate(net, box_of({0, 0}, {1, 1}));
    REQUIRE(nb);
    CHECK(nb->output(0).lower[0] == -1.0);
    CHECK(nb->output(0).upper[0] == 1.0);
    CHECK(nb->output(1).lower[0] == 0.0);
    CHECK(nb->output(1).upper[0] == 1.0);
}

TEST_CASE("interval: point box equals forward") {
    SplitMix64 rng(7);
    const Network net = testing::random_network(rng, {5, 6, 4, 3});
    const auto x = testing::random_input(rng, 5);
    const auto nb = interval_propagate(net, box_of(x, x));
    REQUIRE(nb);
    const auto out = forward(net, x);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(nb->layers.back().lower[i] == doctest::Approx(out[i]).epsilon(1e-12));
        CHECK(nb->layers.back().upper[i] == doctest::Approx(out[i]).epsilon(1e-12));
    }
}

TEST_CASE("phase constraint with empty intersection is infeasible") {
    // Pre-activation x + 0.2 over x in [0, 0.3] is [0.2, 0.5].
    const Network net(Task::Regression, 1, {affine({{1}}, {0.2}), ReluLayer{1}});
    const std::vector<PhaseConstraint> inactive{{1, 0, Phase::Inactive}};
    CHECK_FALSE(interval_propagate(net, box_of({0}, {0.3}), inactive).has_value());
    CHECK_FALSE(backsub_propagate(net, box_of({0}, {0.3}), inactive).has_value());
    const std::vector<PhaseConstraint> active{{1, 0, Phase::Active}};
    CHECK(interval_propagate(net, box_of({0}, {0.3}), active).has_value());
}

TEST_CASE("relu relaxation") {
    const ReluRelaxation r = relax_relu(-1.0, 1.0);
    CHECK(r.upper_slope == 0.5);
    CHECK(r.upper_offset == 0.5);
    CHECK(r.lower_slope == 1.0);
    CHECK(relax_relu(-2.0, 1.0).lower_slope == 0.0);
    CHECK(relax_relu(-1.0, 2.0).lower_slope == 1.0);
    const ReluRelaxation act = relax_relu(0.5, 2.0);
    CHECK(act.upper_slope == 1.0);
    CHECK(act.lower_slope == 1.0);
    const ReluRelaxation inact = relax_relu(-2.0, -0.5);
    CHECK(inact.upper_slope == 0.0);
    CHECK(inact.upper_offset == 0.0);
    CHECK(inact.lower_slope == 0.0);
}

TEST_CASE("all-stable single layer: backsub equals interval") {
    const Network net(Task::Classification, 2, {affine({{1, 1}, {2, -0.5}}, {0.1, 0.6}), ReluLayer{2}});
    const BoxBounds box = box_of({0.1, 0.2}, {0.6, 0.9});
    const auto iv = interval_propagate(net, box);
    const auto bs = backsub_propagate(net, box);
    REQUIRE(iv);
    REQUIRE(bs);
    for (std::size_t k = 0; k < iv->layers.size(); ++k)
        for (std::size_t i = 0; i < iv->layers[k].size(); ++i) {
            CHECK(bs->bounds.layers[k].lower[i] == doctest::Approx(iv->layers[k].lower[i]).epsilon(1e-12));
            CHECK(bs->bounds.layers[k].upper[i] == doctest::Approx(iv->layers[k].upper[i]).epsilon(1e-12));
        }
}

TEST_CASE("all-stable deep network: backsub is the exact linear range") {
    // Every pre-activation is positive on the box, so the net is affine there:
    // z0 = (x1 + x2 + 0.1) - (2 x1 + 0.5 x2 + 0.2) = -x1 + 0.5 x2 - 0.1.
    const Network net(Task::Classification, 2,
                      {affine({{1, 1}, {2, 0.5}}, {0.1, 0.2}), ReluLayer{2}, affine({{1, -1}, {0.5, 1}}, {0, 0})});
    const BoxBounds box = box_of({0.1, 0.2}, {0.6, 0.9});
    const auto iv = interval_propagate(net, box);
    const auto bs = backsub_propagate(net, box);
    REQUIRE(iv);
    REQUIRE(bs);
    CHECK(bs->bounds.layers.back().lower[0] == doctest::Approx(-0.6 + 0.1 - 0.1));
    CHECK(bs->bounds.layers.back().upper[0] == doctest::Approx(-0.1 + 0.45 - 0.1));
    CHECK(iv->layers.back().upper[0] - iv->layers.back().lower[0] >
          bs->bounds.layers.back().upper[0] - bs->bounds.layers.back().lower[0]);
}

TEST_CASE("backsub tightens the antisymmetric relu difference") {
    // y = ReLU(x1 - x2) - ReLU(x2 - x1) = x1 - x2 on [0,1]^2.
    const Network net(Task::Regression, 2,
                      {affine({{1, -1}, {-1, 1}}, {0, 0}), ReluLayer{2}, affine({{1, -1}}, {0})});
    const BoxBounds box = box_of({0, 0}, {1, 1});
    const auto iv = interval_propagate(net, box);
    const auto bs = backsub_propagate(net, box);
    REQUIRE(iv);
    REQUIRE(bs);
    CHECK(iv->layers.back().lower[0] == -1.0);
    CHECK(iv->layers.back().upper[0] == 1.0);
    CHECK(bs->bounds.layers.back().lower[0] >= -1.0);
    CHECK(bs->bounds.layers.back().upper[0] <= 1.0);
    CHECK(bs->bounds.layers.back().upper[0] - bs->bounds.layers.back().lower[0] <= 2.0);
}

TEST_CASE("symbolic output bounds bracket sampled outputs") {
    SplitMix64 rng(13);
    for (int t = 0; t < 30; ++t) {
        const Network net = testing::random_network(rng, {4, 6, 5, 3});
        const BoxBounds box = random_box(rng, 4);
        const auto bs = backsub_propagate(net, box);
        REQUIRE(bs);
        const IntervalVector in = to_intervals(box);
        for (int s = 0; s < 200; ++s) {
            std::vector<double> x(4);
            for (std::size_t i = 0; i < 4; ++i) x[i] = testing::uniform(rng, box.lower[i], box.upper[i]);
            const auto z = forward(net, x);
            for (std::size_t j = 0; j < z.size(); ++j) {
                CHECK(bs->outputs[j].lower.evaluate(x) <= z[j] + 1e-9);
                CHECK(bs->outputs[j].upper.evaluate(x) >= z[j] - 1e-9);
            }
        }
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(bs->outputs[j].upper.concretize(in).hi >= bs->bounds.layers.back().lower[j] - 1e-9);
        }
    }
}

TEST_CASE("sampled activations stay inside both analyzers' bounds, backsub dominates") {
    SplitMix64 rng(17);
    for (int t = 0; t < 40; ++t) {
        const Network net = testing::random_network(rng, {5, 8, 6, 3});
        const BoxBounds box = random_box(rng, 5);
        const auto iv = interval_propagate(net, box);
        const auto bs = backsub_propagate(net, box);
        REQUIRE(iv);
        REQUIRE(bs);
        for (std::size_t k = 0; k < iv->layers.size(); ++k)
            for (std::size_t i = 0; i < iv->layers[k].size(); ++i)
                CHECK(bs->bounds.layers[k].upper[i] - bs->bounds.layers[k].lower[i] <=
                      iv->layers[k].upper[i] - iv->layers[k].lower[i] + 1e-12);
        for (int s = 0; s < 200; ++s) {
            std::vector<double> x(5);
            for (std::size_t i = 0; i < 5; ++i) x[i] = testing::uniform(rng, box.lower[i], box.upper[i]);
            const auto trace = forward_trace(net, x);
            for (std::size_t k = 0; k < trace.size(); ++k) {
                CHECK(within(iv->layers[k], trace[k]));
                CHECK(within(bs->bounds.layers[k], trace[k]));
            }
        }
    }
}

TEST_CASE("bound_output_expression on a linear net is exact") {
    const Network net(Task::Classification, 2, {affine({{2, -1}, {0.5, 1}}, {0.1, 0})});
    const BoxBounds box = box_of({0.2, 0.3}, {0.4, 0.9});
    const auto bs = backsub_propagate(net, box);
    REQUIRE(bs);
    const std::vector<double> coeffs{-1, 1};
    const SymbolicBound sb = bound_output_expression(net, bs->bounds, coeffs, 0.25);
    const IntervalVector in = to_intervals(box);
    // margin = -1.5 x1 + 2 x2 - 0.1 + 0.25, analytic range over the box.
    CHECK(sb.upper.concretize(in).hi == doctest::Approx(-1.5 * 0.2 + 2 * 0.9 + 0.15));
    CHECK(sb.lower.concretize(in).lo == doctest::Approx(-1.5 * 0.4 + 2 * 0.3 + 0.15));
}

TEST_CASE("unstable neurons are reported in order") {
    const Network net(Task::Classification, 1, {affine({{1}, {-1}, {1}}, {-0.5, 0.5, 2}), ReluLayer{3}});
    const auto nb = interval_propagate(net, box_of({0}, {1}));
    REQUIRE(nb);
    const auto un = unstable_neurons(net, *nb);
    REQUIRE(un.size() == 2);
    CHECK(un[0].neuron == 0);
    CHECK(un[1].neuron == 1);
    CHECK(un[0].layer == 1);
}

TEST_CASE("incomplete check: tiny epsilon with positive margins holds") {
    SplitMix64 rng(19);
    const Network net = testing::random_network(rng, {4, 6, 3});
    const auto x = testing::random_input(rng, 4);
    const Prediction p = predict(net, x);
    const VerificationQuery q = build_query(net, x, {}, 0, 1e-9, ClassificationProperty{p.label});
    CHECK(kind_of(check_incomplete(q, Seconds(10))) == VerdictKind::Holds);
}

TEST_CASE("incomplete check on affine nets is never unknown") {
    SplitMix64 rng(23);
    for (int t = 0; t < 100; ++t) {
        const Network net(Task::Classification, 3, {testing::random_affine(rng, 3, 3)});
        const auto x = testing::random_input(rng, 3);
        const Prediction p = predict(net, x);
        std::vector<std::size_t> b{0, 1};
        const VerificationQuery q = build_query(net, x, b, 2, testing::uniform(rng, 0.01, 0.5),
                                                ClassificationProperty{p.label});
        const Verdict v = check_incomplete(q, Seconds(10));
        CHECK(kind_of(v) != VerdictKind::Unknown);
        // Analytic box optimum: each atom's margin is linear, maximized at a corner.
        bool analytic = false;
        for (const auto& atom : decompose(q)) {
            const auto& a = std::get<AffineLayer>(net.layers()[0]);
            double best = atom.offset;
            for (std::size_t j = 0; j < 3; ++j) best += atom.output_coeffs[j] * a.bias[j];
            for (std::size_t i = 0; i < 3; ++i) {
                double c = 0;
                for (std::size_t j = 0; j < 3; ++j) c += atom.output_coeffs[j] * a.weights(j, i);
                best += c * (c > 0 ? q.box().upper[i] : q.box().lower[i]);
            }
            analytic = analytic || atom.refuted_by_upper_bound(best) == false;
        }
        CHECK((kind_of(v) == VerdictKind::Violated) == analytic);
        check_witness_contract(q, v);
    }
}

TEST_CASE("incomplete check finds the flip of the 2-logit line") {
    const Network net = testing::two_logit_line();
    const std::vector<double> x{0.8};
    const Verdict v = check_incomplete(build_query(net, x, {}, 0, 0.4, ClassificationProperty{0}), Seconds(10));
    REQUIRE(std::holds_alternative<Violated>(v));
    const auto& w = std::get<Violated>(v);
    CHECK(w.witness[0] <= 0.5);
    CHECK(violates(ClassificationProperty{0}, forward(net, w.witness)));
}

TEST_CASE("incomplete never contradicts grid falsification") {
    SplitMix64 rng(29);
    for (int t = 0; t < 60; ++t) {
        const Network net = testing::random_network(rng, {2, 5, 2});
        const auto x = testing::random_input(rng, 2);
        const Prediction p = predict(net, x);
        const VerificationQuery q = build_query(net, x, std::vector<std::size_t>{0}, 1,
                                                testing::uniform(rng, 0.01, 0.3), ClassificationProperty{p.label});
        const Verdict v = check_incomplete(q, Seconds(10));
        check_witness_contract(q, v);
        if (oracle::grid_falsify(q, 41)) CHECK(kind_of(v) != VerdictKind::Holds);
    }
}

TEST_CASE("falsifier helpers are deterministic") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    const BoxBounds box = box_of({0, 0.2}, {1, 0.4});
    SymbolicBound sb;
    sb.upper = {{1.0, -1.0}, 0.0};
    sb.lower = {{-1.0, 1.0}, 0.0};
    const auto corners = signed_corners(box, sb);
    REQUIRE(!corners.empty());
    CHECK(corners[0] == std::vector<double>{1.0, 0.2});
}
