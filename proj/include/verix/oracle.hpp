#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "verix/bnb.hpp"
#include "verix/query.hpp"

namespace verix::oracle {

// Refusal to run beyond the configured enumeration budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// Enumerates all 2^k phase patterns of the k ReLUs that interval analysis
// leaves unstable and solves each leaf LP. Never returns Unknown.
Verdict exhaustive_check(const VerificationQuery& query, std::size_t max_unstable = 16);

// Number of ReLUs interval analysis leaves unstable over the query box.
std::size_t unstable_count(const VerificationQuery& query);

// Evaluates `resolution` evenly spaced values per free feature (inclusive of
// both box ends). The absence of a witness proves nothing.
std::optional<Violated> grid_falsify(const VerificationQuery& query, std::size_t resolution,
                                     std::size_t max_points = 1'000'000);

struct ComparisonRow {
    std::size_t query = 0;
    std::size_t unstable = 0;
    VerdictKind incomplete = VerdictKind::Unknown;
    VerdictKind complete = VerdictKind::Unknown;
    VerdictKind exhaustive = VerdictKind::Unknown;
    double incomplete_s = 0.0;
    double complete_s = 0.0;
    double exhaustive_s = 0.0;
    bool witnesses_confirmed = true;
    bool fatal = false;  // complete disagrees with the oracle, or incomplete contradicts it
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::size_t complete_disagreements = 0;
    std::size_t incomplete_contradictions = 0;
    std::size_t incomplete_unknown = 0;
    std::size_t unconfirmed_witnesses = 0;

    bool ok() const { return complete_disagreements == 0 && incomplete_contradictions == 0 && unconfirmed_witnesses == 0; }
    std::string to_text() const;
    std::string to_json() const;
};

struct CompareOptions {
    Seconds time_limit{60.0};
    std::size_t max_unstable = 16;
    BnbOptions complete{};
    IncompleteOptions incomplete{};
};

ComparisonReport compare_backends(std::span<const VerificationQuery> queries, const CompareOptions& options = {});

}  // namespace verix::oracle
