#include "verix/query.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "verix/errors.hpp"

namespace verix {

std::string_view norm_name(Norm norm) {
    switch (norm) {
        case Norm::Linf: return "inf";
        case Norm::L1: return "1";
        case Norm::L2: return "2";
    }
    return "?";
}

Norm parse_norm(std::string_view text) {
    if (text == "inf" || text == "linf" || text == "Linf") return Norm::Linf;
    if (text == "1" || text == "l1") return Norm::L1;
    if (text == "2" || text == "l2") return Norm::L2;
    throw InvalidArgument("unknown norm '" + std::string(text) + "'");
}

bool BoxBounds::contains(std::span<const double> x, double tol) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    }
    return true;
}

FeaturePartition FeaturePartition::from_free(std::size_t d, std::vector<std::size_t> free) {
    std::ranges::sort(free);
    if (std::ranges::adjacent_find(free) != free.end()) throw InvalidArgument("duplicate free feature index");
    if (!free.empty() && free.back() >= d) {
        throw InvalidArgument("free feature index " + std::to_string(free.back()) + " out of range");
    }
    FeaturePartition p;
    p.free = std::move(free);
    for (std::size_t i = 0, j = 0; i < d; ++i) {
        if (j < p.free.size() && p.free[j] == i) ++j;
        else p.fixed.push_back(i);
    }
    return p;
}

bool violates(const OutputProperty& property, std::span<const double> outputs) {
    if (const auto* cls = std::get_if<ClassificationProperty>(&property)) {
        for (std::size_t j = 0; j < outputs.size(); ++j) {
            if (j != cls->label && outputs[j] >= outputs[cls->label]) return true;
        }
        return false;
    }
    const auto& reg = std::get<RegressionProperty>(property);
    return !(std::abs(outputs.front() - reg.target) <= reg.delta);
}

VerificationQuery::VerificationQuery(const Network& net, std::vector<double> center, FeaturePartition partition,
                                     double epsilon, OutputProperty property, Norm norm)
    : net_(&net),
      center_(std::move(center)),
      partition_(std::move(partition)),
      epsilon_(epsilon),
      norm_(norm),
      property_(property) {
    if (norm_ != Norm::Linf) {
        throw UnsupportedNorm("unsupported norm p=" + std::string(norm_name(norm_)) + ": only p=inf is supported");
    }
    if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) throw InvalidArgument("epsilon must be positive");
    validate_input(net, center_);
    const std::size_t d = net.input_dim();
    if (partition_.free.size() + partition_.fixed.size() != d) {
        throw InvalidArgument("partition does not cover every feature");
    }
    if (const auto* cls = std::get_if<ClassificationProperty>(&property_)) {
        if (net.task() != Task::Classification) throw InvalidArgument("classification property on a regression network");
        if (cls->label >= net.output_dim()) throw InvalidArgument("label out of range");
    } else {
        const auto& reg = std::get<RegressionProperty>(property_);
        if (net.task() != Task::Regression) throw InvalidArgument("regression property on a classification network");
        if (!(reg.delta >= 0.0)) throw InvalidArgument("delta must be non-negative");
    }

    box_.lower = center_;
    box_.upper = center_;
    for (std::size_t i : partition_.free) {
        box_.lower[i] = std::max(0.0, center_[i] - epsilon_);
        box_.upper[i] = std::min(1.0, center_[i] + epsilon_);
    }
}

VerificationQuery build_query(const Network& net, std::span<const double> x, std::span<const std::size_t> irrelevant,
                              std::size_t candidate, double epsilon, OutputProperty property, Norm norm) {
    if (std::ranges::find(irrelevant, candidate) != irrelevant.end()) {
        throw ContractViolation("candidate feature " + std::to_string(candidate) + " is already irrelevant");
    }
    std::vector<std::size_t> free(irrelevant.begin(), irrelevant.end());
    free.push_back(candidate);
    return VerificationQuery(net, std::vector<double>(x.begin(), x.end()),
                             FeaturePartition::from_free(net.input_dim(), std::move(free)), epsilon, property, norm);
}

double AtomicQuery::margin(std::span<const double> outputs) const {
    double m = offset;
    for (std::size_t j = 0; j < outputs.size(); ++j) m += output_coeffs[j] * outputs[j];
    return m;
}

bool AtomicQuery::violated_by(std::span<const double> outputs) const {
    const double m = margin(outputs);
    return strict ? m > 0.0 : m >= 0.0;
}

std::vector<AtomicQuery> decompose(const VerificationQuery& query) {
    const std::size_t k = query.net().output_dim();
    std::vector<AtomicQuery> atoms;
    if (const auto* cls = std::get_if<ClassificationProperty>(&query.property())) {
        for (std::size_t j = 0; j < k; ++j) {
            if (j == cls->label) continue;
            AtomicQuery atom{atoms.size(), std::vector<double>(k, 0.0), 0.0, false};
            atom.output_coeffs[j] = 1.0;
            atom.output_coeffs[cls->label] = -1.0;
            atoms.push_back(std::move(atom));
        }
    } else {
        const auto& reg = std::get<RegressionProperty>(query.property());
        atoms.push_back({0, {1.0}, -(reg.target + reg.delta), true});
        atoms.push_back({1, {-1.0}, reg.target - reg.delta, true});
    }
    return atoms;
}

VerdictKind kind_of(const Verdict& verdict) {
    return static_cast<VerdictKind>(verdict.index());
}

std::string_view verdict_name(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Holds: return "holds";
        case VerdictKind::Violated: return "violated";
        case VerdictKind::Unknown: return "unknown";
    }
    return "?";
}

std::string describe(const Verdict& verdict) {
    if (std::holds_alternative<Holds>(verdict)) return "HOLDS";
    if (std::holds_alternative<Violated>(verdict)) return "VIOLATED";
    return std::get<Unknown>(verdict).reason == UnknownReason::Timeout ? "UNKNOWN(timeout)"
                                                                      : "UNKNOWN(precision)";
}

std::optional<Violated> confirm_witness(const VerificationQuery& query, std::span<const double> point) {
    const BoxBounds& box = query.box();
    std::vector<double> w(point.begin(), point.end());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::clamp(w[i], box.lower[i], box.upper[i]);
    std::vector<double> out = forward(query.net(), w);
    if (!violates(query.property(), out)) return std::nullopt;
    return Violated{std::move(w), std::move(out)};
}

void check_witness_contract(const VerificationQuery& query, const Verdict& verdict) {
    const auto* v = std::get_if<Violated>(&verdict);
    if (v == nullptr) return;
    if (!query.box().contains(v->witness)) throw ContractViolation("witness lies outside the query box");
    if (!violates(query.property(), forward(query.net(), v->witness))) {
        throw ContractViolation("witness does not violate the property under forward evaluation");
    }
}

// Limits beyond ~115 days are treated as unbounded.
Deadline::Deadline(Seconds limit)
    : end_(std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(Seconds(std::min(limit.count(), 1e7)))) {}

bool Deadline::expired() const { return std::chrono::steady_clock::now() >= end_; }

Seconds Deadline::remaining() const { return end_ - std::chrono::steady_clock::now(); }

Verdict combine(std::span<const Verdict> per_atom) {
    const Verdict* unknown = nullptr;
    for (const Verdict& v : per_atom) {
        if (std::holds_alternative<Violated>(v)) return v;
        if (unknown == nullptr && std::holds_alternative<Unknown>(v)) unknown = &v;
    }
    return unknown != nullptr ? *unknown : Verdict{Holds{}};
}

}  // namespace verix
