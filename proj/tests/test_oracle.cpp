#include <doctest.h>

#include "support.hpp"
#include "verix/oracle.hpp"

using namespace verix;
using testing::affine;

TEST_CASE("affine net: one pattern, analytic verdict") {
    const Network net = testing::two_logit_line();
    const std::vector<double> x{0.8};
    const VerificationQuery holds = build_query(net, x, {}, 0, 0.2, ClassificationProperty{0});
    const VerificationQuery flips = build_query(net, x, {}, 0, 0.4, ClassificationProperty{0});
    CHECK(oracle::unstable_count(holds) == 0);
    CHECK(kind_of(oracle::exhaustive_check(holds)) == VerdictKind::Holds);
    CHECK(kind_of(oracle::exhaustive_check(flips)) == VerdictKind::Violated);
}

TEST_CASE("bnb example queries give identical verdicts") {
    const Network relu = testing::relu_identity();
    for (double delta : {0.2, 0.05}) {
        const VerificationQuery q = build_query(relu, std::vector<double>{0.5}, {}, 0, 0.1, RegressionProperty{0.5, delta});
        CHECK(kind_of(oracle::exhaustive_check(q)) == kind_of(check_complete(q)));
    }
}

TEST_CASE("fully fixed query is a point check") {
    SplitMix64 rng(3);
    const Network net = testing::random_network(rng, {3, 4, 2});
    const auto x = testing::random_input(rng, 3);
    const Prediction p = predict(net, x);
    const VerificationQuery q(net, x, FeaturePartition::from_free(3, {}), 0.1, ClassificationProperty{p.label});
    CHECK(oracle::unstable_count(q) == 0);
    CHECK(kind_of(oracle::exhaustive_check(q)) == VerdictKind::Holds);
    const VerificationQuery wrong(net, x, FeaturePartition::from_free(3, {}), 0.1, ClassificationProperty{1 - p.label});
    CHECK(kind_of(oracle::exhaustive_check(wrong)) == VerdictKind::Violated);
    CHECK(oracle::grid_falsify(wrong, 5).has_value());
    CHECK_FALSE(oracle::grid_falsify(q, 5).has_value());
}

TEST_CASE("cap and grid budget refuse instead of guessing") {
    SplitMix64 rng(5);
    const Network net = testing::random_network(rng, {4, 30, 2});
    const auto x = testing::random_input(rng, 4);
    const VerificationQuery q(net, x, FeaturePartition::from_free(4, {0, 1, 2, 3}), 1.0, ClassificationProperty{0});
    REQUIRE(oracle::unstable_count(q) > 2);
    CHECK_THROWS_AS(oracle::exhaustive_check(q, 2), oracle::BudgetExceeded);
    CHECK_THROWS_AS(oracle::grid_falsify(q, 100, 1000), oracle::BudgetExceeded);
}

TEST_CASE("grid falsification finds the crossing of the 2-logit line") {
    const Network net = testing::two_logit_line();
    const VerificationQuery q = build_query(net, std::vector<double>{0.8}, {}, 0, 0.4, ClassificationProperty{0});
    const auto w = oracle::grid_falsify(q, 11);
    REQUIRE(w.has_value());
    CHECK(w->witness[0] <= 0.5);
    CHECK(violates(q.property(), forward(net, w->witness)));
    const VerificationQuery safe = build_query(net, std::vector<double>{0.8}, {}, 0, 0.2, ClassificationProperty{0});
    CHECK_FALSE(oracle::grid_falsify(safe, 11).has_value());
}

TEST_CASE("compare_backends over random tiny nets") {
    SplitMix64 rng(47);
    std::vector<VerificationQuery> queries;
    std::vector<Network> nets;
    nets.reserve(60);
    while (queries.size() < 60) {
        nets.push_back(testing::random_network(rng, {3, 5, 3}));
        const auto x = testing::random_input(rng, 3);
        const Prediction p = predict(nets.back(), x);
        VerificationQuery q(nets.back(), x, FeaturePartition::from_free(3, {0, 1, 2}),
                            testing::uniform(rng, 0.01, 0.3), ClassificationProperty{p.label});
        if (oracle::unstable_count(q) <= 5) queries.push_back(std::move(q));
        else nets.pop_back();
    }
    const oracle::ComparisonReport report = oracle::compare_backends(queries);
    CHECK(report.rows.size() == 60);
    CHECK(report.complete_disagreements == 0);
    CHECK(report.incomplete_contradictions == 0);
    CHECK(report.ok());
    for (const auto& row : report.rows) {
        if (row.incomplete == VerdictKind::Holds) CHECK(row.exhaustive == VerdictKind::Holds);
        if (row.incomplete == VerdictKind::Violated) CHECK(row.exhaustive == VerdictKind::Violated);
    }
    CHECK(report.to_text().find("disagreements") != std::string::npos);
    CHECK(report.to_json().front() == '{');
}
