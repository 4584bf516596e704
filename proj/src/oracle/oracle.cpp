#include "verix/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace verix::oracle {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return Seconds(std::chrono::steady_clock::now() - start).count();
}

bool witness_ok(const VerificationQuery& query, const Verdict& verdict) {
    const auto* v = std::get_if<Violated>(&verdict);
    if (v == nullptr) return true;
    return query.box().contains(v->witness) && violates(query.property(), forward(query.net(), v->witness));
}

}  // namespace

std::size_t unstable_count(const VerificationQuery& query) {
    const auto bounds = interval_propagate(query.net(), query.box());
    return unstable_neurons(query.net(), *bounds).size();
}

Verdict exhaustive_check(const VerificationQuery& query, std::size_t max_unstable) {
    const auto bounds = interval_propagate(query.net(), query.box());
    const std::vector<UnstableNeuron> unstable = unstable_neurons(query.net(), *bounds);
    if (unstable.size() > max_unstable) {
        throw BudgetExceeded("exhaustive check refused: " + std::to_string(unstable.size()) +
                             " unstable ReLUs exceed the cap of " + std::to_string(max_unstable));
    }
    const std::size_t patterns = std::size_t{1} << unstable.size();
    std::vector<PhaseConstraint> phases(unstable.size());
    for (const AtomicQuery& atom : decompose(query)) {
        for (std::size_t mask = 0; mask < patterns; ++mask) {
            for (std::size_t b = 0; b < unstable.size(); ++b) {
                phases[b] = {unstable[b].layer, unstable[b].neuron,
                             (mask >> b) & 1U ? Phase::Active : Phase::Inactive};
            }
            const LeafResult leaf = solve_leaf(query, atom, *bounds, phases);
            if (leaf.witness) return Violated{*leaf.witness};
        }
    }
    return Holds{};
}

std::optional<Violated> grid_falsify(const VerificationQuery& query, std::size_t resolution, std::size_t max_points) {
    const std::vector<std::size_t>& free = query.partition().free;
    if (resolution == 0) throw InvalidArgument("grid resolution must be positive");
    double total = std::pow(static_cast<double>(resolution), static_cast<double>(free.size()));
    if (total > static_cast<double>(max_points)) {
        throw BudgetExceeded("grid of " + std::to_string(resolution) + "^" + std::to_string(free.size()) +
                             " points exceeds the budget");
    }
    const BoxBounds& box = query.box();
    const auto value = [&](std::size_t feature, std::size_t step) {
        if (resolution == 1) return 0.5 * (box.lower[feature] + box.upper[feature]);
        const double t = static_cast<double>(step) / static_cast<double>(resolution - 1);
        return box.lower[feature] + t * (box.upper[feature] - box.lower[feature]);
    };

    std::vector<std::size_t> counter(free.size(), 0);
    std::vector<double> point = query.center();
    for (;;) {
        for (std::size_t v = 0; v < free.size(); ++v) point[free[v]] = value(free[v], counter[v]);
        if (auto w = confirm_witness(query, point)) return w;
        std::size_t v = 0;
        while (v < free.size() && ++counter[v] == resolution) counter[v++] = 0;
        if (v == free.size()) return std::nullopt;
    }
}

ComparisonReport compare_backends(std::span<const VerificationQuery> queries, const CompareOptions& options) {
    ComparisonReport report;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const VerificationQuery& query = queries[q];
        ComparisonRow row;
        row.query = q;
        row.unstable = unstable_count(query);

        auto start = std::chrono::steady_clock::now();
        const Verdict incomplete = check_incomplete(query, options.time_limit, options.incomplete);
        row.incomplete_s = seconds_since(start);

        BnbOptions complete_options = options.complete;
        complete_options.limits.time_limit = options.time_limit;
        start = std::chrono::steady_clock::now();
        const Verdict complete = check_complete(query, complete_options);
        row.complete_s = seconds_since(start);

        start = std::chrono::steady_clock::now();
        const Verdict exhaustive = exhaustive_check(query, options.max_unstable);
        row.exhaustive_s = seconds_since(start);

        row.incomplete = kind_of(incomplete);
        row.complete = kind_of(complete);
        row.exhaustive = kind_of(exhaustive);
        row.witnesses_confirmed =
            witness_ok(query, incomplete) && witness_ok(query, complete) && witness_ok(query, exhaustive);

        if (row.complete != row.exhaustive) ++report.complete_disagreements, row.fatal = true;
        if (row.incomplete == VerdictKind::Unknown) ++report.incomplete_unknown;
        else if (row.incomplete != row.exhaustive) ++report.incomplete_contradictions, row.fatal = true;
        if (!row.witnesses_confirmed) ++report.unconfirmed_witnesses, row.fatal = true;
        report.rows.push_back(row);
    }
    return report;
}

std::string ComparisonReport::to_text() const {
    std::ostringstream out;
    out << "query  unstable  incomplete  complete  exhaustive  t_inc(s)  t_cmp(s)  t_exh(s)  status\n";
    for (const ComparisonRow& r : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%5zu  %8zu  %-10s  %-8s  %-10s  %8.4f  %8.4f  %8.4f  %s\n", r.query,
                      r.unstable, verdict_name(r.incomplete).data(), verdict_name(r.complete).data(),
                      verdict_name(r.exhaustive).data(), r.incomplete_s, r.complete_s, r.exhaustive_s,
                      r.fatal ? "FATAL" : "ok");
        out << line;
    }
    out << "complete/oracle disagreements: " << complete_disagreements << "\n"
        << "incomplete contradictions: " << incomplete_contradictions << "\n"
        << "incomplete unknown: " << incomplete_unknown << "\n"
        << "unconfirmed witnesses: " << unconfirmed_witnesses << "\n";
    return out.str();
}

std::string ComparisonReport::to_json() const {
    nlohmann::json doc;
    doc["rows"] = nlohmann::json::array();
    for (const ComparisonRow& r : rows) {
        doc["rows"].push_back({{"query", r.query},
                               {"unstable", r.unstable},
                               {"incomplete", verdict_name(r.incomplete)},
                               {"complete", verdict_name(r.complete)},
                               {"exhaustive", verdict_name(r.exhaustive)},
                               {"incomplete_s", r.incomplete_s},
                               {"complete_s", r.complete_s},
                               {"exhaustive_s", r.exhaustive_s},
                               {"fatal", r.fatal}});
    }
    doc["complete_disagreements"] = complete_disagreements;
    doc["incomplete_contradictions"] = incomplete_contradictions;
    doc["incomplete_unknown"] = incomplete_unknown;
    doc["unconfirmed_witnesses"] = unconfirmed_witnesses;
    return doc.dump(2);
}

}  // namespace verix::oracle
