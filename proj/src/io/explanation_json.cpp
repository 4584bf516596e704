#include <json.hpp>

#include "verix/errors.hpp"
#include "verix/io.hpp"

namespace verix::io {
namespace {

using nlohmann::json;

json prediction_json(const Prediction& p) {
    return {{"task", p.task == Task::Classification ? "classification" : "regression"},
            {"label", p.label},
            {"value", p.value}};
}

Prediction prediction_from(const json& j) {
    Prediction p;
    p.task = j.at("task").get<std::string>() == "regression" ? Task::Regression : Task::Classification;
    p.label = j.at("label").get<std::size_t>();
    p.value = j.at("value").get<double>();
    return p;
}

VerdictKind verdict_from(const std::string& s) {
    if (s == "holds") return VerdictKind::Holds;
    if (s == "violated") return VerdictKind::Violated;
    if (s == "unknown") return VerdictKind::Unknown;
    throw InvalidArgument("unknown verdict '" + s + "'");
}

}  // namespace

std::string traversal_kind_name(TraversalKind kind) {
    switch (kind) {
        case TraversalKind::Sequential: return "sequential";
        case TraversalKind::Random: return "random";
        case TraversalKind::Sensitivity: return "sensitivity";
    }
    return "?";
}

TraversalKind parse_traversal_kind(const std::string& text) {
    if (text == "sequential") return TraversalKind::Sequential;
    if (text == "random") return TraversalKind::Random;
    if (text == "sensitivity") return TraversalKind::Sensitivity;
    throw InvalidArgument("unknown traversal '" + text + "'");
}

std::string transform_name(TransformKind kind) { return kind == TransformKind::Deletion ? "deletion" : "reversal"; }

TransformKind parse_transform(const std::string& text) {
    if (text == "deletion") return TransformKind::Deletion;
    if (text == "reversal") return TransformKind::Reversal;
    throw InvalidArgument("unknown transform '" + text + "'");
}

std::string explanation_to_json(const Explanation& e, bool include_timing) {
    json doc;
    const TraversalSpec& t = e.params.traversal;
    doc["params"] = {{"epsilon", e.params.epsilon},
                     {"norm", norm_name(e.params.norm)},
                     {"delta", e.params.delta ? json(*e.params.delta) : json(nullptr)},
                     {"backend", e.params.backend},
                     {"traversal",
                      {{"kind", traversal_kind_name(t.kind)},
                       {"seed", t.seed},
                       {"transform", transform_name(t.transform.kind)},
                       {"transform_upper", t.transform.upper},
                       {"ranking", t.ranking == SensitivityRanking::Magnitude ? "magnitude" : "signed"}}}};
    doc["prediction"] = prediction_json(e.prediction);
    doc["order"] = e.order;
    doc["A"] = e.explanation;
    doc["B"] = e.irrelevant;
    doc["unknown"] = e.unknown;
    doc["backend_calls"] = e.backend_calls;
    doc["steps"] = json::array();
    for (const StepRecord& s : e.steps) {
        json step{{"feature", s.feature}, {"verdict", verdict_name(s.verdict)}};
        if (include_timing) step["time_s"] = s.time_s;
        doc["steps"].push_back(std::move(step));
    }
    doc["counterfactuals"] = json::array();
    for (const Counterfactual& cf : e.counterfactuals) {
        doc["counterfactuals"].push_back({{"feature", cf.feature},
                                          {"input", cf.input},
                                          {"output", cf.output},
                                          {"prediction", prediction_json(cf.prediction)}});
    }
    return doc.dump(2) + "\n";
}

Explanation explanation_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError("<explanation>", "byte " + std::to_string(err.byte), err.what());
    }
    try {
        Explanation e;
        const json& params = doc.at("params");
        e.params.epsilon = params.at("epsilon").get<double>();
        e.params.norm = parse_norm(params.at("norm").get<std::string>());
        if (!params.at("delta").is_null()) e.params.delta = params.at("delta").get<double>();
        e.params.backend = params.at("backend").get<std::string>();
        const json& t = params.at("traversal");
        e.params.traversal.kind = parse_traversal_kind(t.at("kind").get<std::string>());
        e.params.traversal.seed = t.at("seed").get<std::uint64_t>();
        e.params.traversal.transform.kind = parse_transform(t.at("transform").get<std::string>());
        e.params.traversal.transform.upper = t.at("transform_upper").get<double>();
        e.params.traversal.ranking =
            t.at("ranking").get<std::string>() == "signed" ? SensitivityRanking::Signed : SensitivityRanking::Magnitude;
        e.prediction = prediction_from(doc.at("prediction"));
        e.order = doc.at("order").get<std::vector<std::size_t>>();
        e.explanation = doc.at("A").get<std::vector<std::size_t>>();
        e.irrelevant = doc.at("B").get<std::vector<std::size_t>>();
        e.unknown = doc.at("unknown").get<std::vector<std::size_t>>();
        e.backend_calls = doc.at("backend_calls").get<std::size_t>();
        for (const json& s : doc.at("steps")) {
            e.steps.push_back({s.at("feature").get<std::size_t>(), verdict_from(s.at("verdict").get<std::string>()),
                               s.value("time_s", 0.0)});
        }
        for (const json& cf : doc.at("counterfactuals")) {
            e.counterfactuals.push_back({cf.at("feature").get<std::size_t>(), cf.at("input").get<std::vector<double>>(),
                                         cf.at("output").get<std::vector<double>>(),
                                         prediction_from(cf.at("prediction"))});
        }
        return e;
    } catch (const json::exception& err) {
        throw ParseError("<explanation>", "schema", err.what());
    }
}

std::string epsilon_map_to_json(const EpsilonMap& map) {
    json doc;
    doc["epsilons"] = map.epsilons;
    doc["smallest_irrelevant"] = json::array();
    for (const auto& v : map.smallest_irrelevant) doc["smallest_irrelevant"].push_back(v ? json(*v) : json(nullptr));
    doc["explanation_sizes"] = json::array();
    for (const Explanation& run : map.runs) doc["explanation_sizes"].push_back(run.explanation.size());
    return doc.dump(2) + "\n";
}

}  // namespace verix::io
