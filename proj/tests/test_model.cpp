#include <doctest.h>

#include <cmath>
#include <string>

#include "support.hpp"
#include "verix/errors.hpp"
#include "verix/model.hpp"

using namespace verix;
using testing::affine;

TEST_CASE("forward: identity affine") {
    const Network net(Task::Classification, 2, {affine({{1, 0}, {0, 1}}, {0, 0})});
    CHECK(forward(net, std::vector<double>{0.3, 0.7}) == std::vector<double>{0.3, 0.7});
}

TEST_CASE("forward: hand-evaluated affine then relu") {
    const Network net(Task::Classification, 2, {affine({{1, -1}, {2, 0}}, {0.5, -1}), ReluLayer{2}});
    const std::vector<double> x{1, 2};
    const auto trace = forward_trace(net, x);
    REQUIRE(trace.size() == 2);
    CHECK(trace[0] == std::vector<double>{-0.5, 1.0});
    CHECK(trace[1] == std::vector<double>{0.0, 1.0});
    CHECK(forward(net, x) == trace[1]);
}

TEST_CASE("forward: zeros propagate with zero biases") {
    SplitMix64 rng(3);
    std::vector<Layer> layers{testing::random_affine(rng, 4, 3), ReluLayer{4}, testing::random_affine(rng, 2, 4)};
    for (auto& l : layers)
        if (auto* a = std::get_if<AffineLayer>(&l)) std::fill(a->bias.begin(), a->bias.end(), 0.0);
    const Network net(Task::Classification, 3, std::move(layers));
    CHECK(forward(net, std::vector<double>(3, 0.0)) == std::vector<double>(2, 0.0));
}

TEST_CASE("forward is bit-identical across calls") {
    SplitMix64 rng(11);
    const Network net = testing::random_network(rng, {8, 6, 6, 3});
    const auto x = testing::random_input(rng, 8);
    CHECK(forward(net, x) == forward(net, x));
}

TEST_CASE("argmax and predict") {
    CHECK(argmax(std::vector<double>{0.1, 0.9, 0.3}) == 1);
    CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
    const Network reg(Task::Regression, 1, {affine({{1.0}}, {3.44})});
    const Prediction p = predict(reg, std::vector<double>{0.5});
    CHECK(p.task == Task::Regression);
    CHECK(p.value == doctest::Approx(3.94));
}

TEST_CASE("predict is invariant to positive rescaling of the last layer") {
    SplitMix64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Network net = testing::random_network(rng, {5, 7, 4});
        auto layers = net.layers();
        auto& last = std::get<AffineLayer>(layers.back());
        const double s = testing::uniform(rng, 0.1, 10.0);
        for (std::size_t r = 0; r < last.weights.rows(); ++r)
            for (std::size_t c = 0; c < last.weights.cols(); ++c) last.weights(r, c) *= s;
        for (double& b : last.bias) b *= s;
        const Network scaled(Task::Classification, 5, std::move(layers));
        const auto x = testing::random_input(rng, 5);
        CHECK(predict(net, x).label == predict(scaled, x).label);
    }
}

TEST_CASE("network invariants are enforced") {
    CHECK_THROWS_AS(Network(Task::Classification, 3, {affine({{1, 0}, {0, 1}}, {0, 0})}), ModelError);
    CHECK_THROWS_AS(Network(Task::Classification, 2, {affine({{1, 0}}, {0})}), ModelError);
    CHECK_THROWS_AS(Network(Task::Regression, 2, {affine({{1, 0}, {0, 1}}, {0, 0})}), ModelError);
    CHECK_THROWS_AS(Network(Task::Classification, 2, {affine({{1, 0}, {0, NAN}}, {0, 0})}), ModelError);
    CHECK_THROWS_AS(Network(Task::Classification, 2, {affine({{1, 0}, {0, 1}}, {0})}), ModelError);
    try {
        Network(Task::Classification, 2, {affine({{1, 0}, {0, 1}}, {0, 0}), ReluLayer{2}, affine({{1, 0, 0}, {0, 1, 0}}, {0, 0})});
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        REQUIRE(e.layer().has_value());
        CHECK(*e.layer() == 2);
    }
}

TEST_CASE("input validation") {
    const Network net(Task::Classification, 2, {affine({{1, 0}, {0, 1}}, {0, 0})});
    CHECK_THROWS_AS(validate_input(net, std::vector<double>{0.5}), InvalidArgument);
    CHECK_THROWS_AS(validate_input(net, std::vector<double>{0.5, 1.5}), InvalidArgument);
    CHECK_NOTHROW(validate_input(net, std::vector<double>{0.0, 1.0}));
}

TEST_CASE("load: minimal file and mismatched dims") {
    const Network net = parse_network(R"({"task":"classification","input_dim":2,
        "layers":[{"type":"affine","weights":[[1,0],[0,1]],"bias":[0,0]}]})");
    CHECK(net.layers().size() == 1);
    try {
        parse_network(R"({"task":"classification","input_dim":2,"layers":[
            {"type":"affine","weights":[[1,0],[0,1]],"bias":[0,0]},
            {"type":"affine","weights":[[1,0,0],[0,1,0]],"bias":[0,0]}]})");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("layer") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_network(R"({"task":"classification","input_dim":2,"layers":[{"type":"maxpool"}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_network("{not json"), ParseError);
}

TEST_CASE("json round trip") {
    SplitMix64 rng(9);
    const Network net = testing::random_network(rng, {4, 5, 3});
    CHECK(parse_network(network_to_json(net)) == net);
}

TEST_CASE("conv2d: 2x2 input, 2x2 kernel lowers to its own row") {
    const Network net = parse_network(R"({"task":"regression","input_dim":4,"layers":[
        {"type":"conv2d","kernel":[[1,2],[3,4]],"stride":1,"input_shape":[2,2]}]})");
    const auto& a = std::get<AffineLayer>(net.layers()[0]);
    CHECK(a.weights.rows() == 1);
    CHECK(a.weights.cols() == 4);
    CHECK(std::vector<double>(a.weights.row(0).begin(), a.weights.row(0).end()) == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("conv2d lowering equals direct convolution") {
    SplitMix64 rng(21);
    Conv2dSpec conv;
    conv.in_channels = 2;
    conv.in_height = 6;
    conv.in_width = 5;
    conv.out_channels = 3;
    conv.kernel_height = 3;
    conv.kernel_width = 2;
    conv.stride = 2;
    conv.padding = 1;
    conv.kernel.resize(3 * 2 * 3 * 2);
    for (double& k : conv.kernel) k = testing::uniform(rng, -1, 1);
    conv.bias = {0.1, -0.2, 0.3};
    const AffineLayer lowered = lower_conv2d(conv);
    const Network net(Task::Classification, 60, {lowered});
    for (int t = 0; t < 1000; ++t) {
        const auto x = testing::random_input(rng, 60);
        const auto direct = conv2d_direct(conv, x);
        const auto via = forward(net, x);
        REQUIRE(direct.size() == via.size());
        for (std::size_t i = 0; i < via.size(); ++i) REQUIRE(std::abs(direct[i] - via[i]) <= 1e-9);
    }
}
