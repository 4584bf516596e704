#include "verix/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>

#include "verix/bnb.hpp"
#include "verix/bounds.hpp"
#include "verix/errors.hpp"
#include "verix/explain.hpp"
#include "verix/io.hpp"
#include "verix/oracle.hpp"
#include "verix/train.hpp"

namespace verix::cli {
namespace {

namespace fs = std::filesystem;

struct CommonFlags {
    std::string network;
    std::string input;
    double epsilon = 0.05;
    std::optional<double> delta;
    std::string norm = "inf";
    std::string traversal = "sensitivity";
    std::uint64_t seed = 0;
    std::string transform = "deletion";
    std::string ranking = "magnitude";
    std::string backend = "complete";
    double timeout = 300.0;
};

void add_network_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--network", f.network, "Network JSON file")->required();
    cmd->add_option("--input", f.input, "Input (.pgm image or flat CSV)")->required();
    cmd->add_option("--delta", f.delta, "Allowed output deviation (regression networks)");
    cmd->add_option("--norm", f.norm, "Perturbation norm (only inf is supported)");
    cmd->add_option("--backend", f.backend, "complete|incomplete")->check(CLI::IsMember({"complete", "incomplete"}));
    cmd->add_option("--timeout", f.timeout, "Per-query time limit in seconds")->check(CLI::PositiveNumber);
}

void add_traversal_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--traversal", f.traversal, "sequential|random|sensitivity")
        ->check(CLI::IsMember({"sequential", "random", "sensitivity"}));
    cmd->add_option("--seed", f.seed, "Seed for random traversal and samplers");
    cmd->add_option("--transform", f.transform, "deletion|reversal")->check(CLI::IsMember({"deletion", "reversal"}));
    cmd->add_option("--ranking", f.ranking, "Sensitivity ranking: magnitude|signed")
        ->check(CLI::IsMember({"magnitude", "signed"}));
}

TraversalSpec traversal_spec(const CommonFlags& f) {
    TraversalSpec spec;
    spec.kind = io::parse_traversal_kind(f.traversal);
    spec.seed = f.seed;
    spec.transform.kind = io::parse_transform(f.transform);
    spec.ranking = f.ranking == "signed" ? SensitivityRanking::Signed : SensitivityRanking::Magnitude;
    return spec;
}

std::unique_ptr<VerificationBackend> make_backend(const std::string& name, std::uint64_t seed) {
    IncompleteOptions root;
    root.seed = derive_seed(0x5eed, seed);
    if (name == "incomplete") return std::make_unique<IncompleteBackend>(root);
    BnbOptions options;
    options.root = root;
    return std::make_unique<CompleteBackend>(options);
}

VerixOptions verix_options(const CommonFlags& f, const Network& net) {
    const Norm norm = parse_norm(f.norm);
    if (norm != Norm::Linf) throw UnsupportedNorm("unsupported norm p=" + f.norm + ": only p=inf is supported");
    if (!(f.epsilon > 0.0)) throw InvalidArgument("--epsilon must be positive");
    if (net.task() == Task::Regression && !f.delta) throw InvalidArgument("--delta is required for regression networks");
    VerixOptions options;
    options.epsilon = f.epsilon;
    options.norm = norm;
    options.delta = f.delta;
    options.traversal = traversal_spec(f);
    options.per_query_time_limit = Seconds(f.timeout);
    return options;
}

struct Loaded {
    Network net;
    io::InputSample input;
};

Loaded load(const CommonFlags& f) {
    Loaded l{load_network(f.network), io::load_input(f.input)};
    validate_input(l.net, l.input.features);
    return l;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw InvalidArgument("not a number in list: '" + token + "'");
        }
    }
    return values;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_list(text)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw InvalidArgument("feature indices must be non-negative integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

int cmd_explain(const CommonFlags& f, const std::string& out_path, const std::string& mask_path, bool timings,
                std::ostream& out) {
    Loaded l = load(f);
    const VerixOptions options = verix_options(f, l.net);
    auto backend = make_backend(f.backend, f.seed);
    const Explanation e = verix(l.net, l.input.features, options, *backend);
    io::write_text(out_path, io::explanation_to_json(e, timings));
    if (!mask_path.empty()) io::write_pgm(mask_path, io::explanation_mask(e, l.input.width, l.input.height));
    out << "explanation: " << e.explanation.size() << " features, irrelevant: " << e.irrelevant.size()
        << ", unknown: " << e.unknown.size() << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::string& epsilons_text, const std::string& out_path,
              const std::string& map_path, std::ostream& out) {
    Loaded l = load(f);
    const std::vector<double> epsilons = parse_list(epsilons_text);
    CommonFlags first = f;
    if (!epsilons.empty()) first.epsilon = epsilons.front();
    const VerixOptions options = verix_options(first, l.net);
    auto backend = make_backend(f.backend, f.seed);
    const EpsilonMap map = epsilon_sweep(l.net, l.input.features, epsilons, options, *backend);
    io::write_text(out_path, io::epsilon_map_to_json(map));
    if (!map_path.empty()) io::write_pgm(map_path, io::sweep_colormap(map, l.input.width, l.input.height));
    for (std::size_t k = 0; k < map.runs.size(); ++k) {
        out << "epsilon " << map.epsilons[k] << ": explanation " << map.runs[k].explanation.size() << "\n";
    }
    return kExitOk;
}

int cmd_verify(const CommonFlags& f, const std::string& free_text, const std::string& witness_path, std::ostream& out) {
    Loaded l = load(f);
    const Norm norm = parse_norm(f.norm);
    if (norm != Norm::Linf) throw UnsupportedNorm("unsupported norm p=" + f.norm + ": only p=inf is supported");
    const Prediction prediction = predict(l.net, l.input.features);
    const OutputProperty property = property_for(l.net, prediction, f.delta);
    std::vector<std::size_t> free = free_text == "all" ? std::vector<std::size_t>(l.net.input_dim()) : parse_indices(free_text);
    if (free_text == "all") std::iota(free.begin(), free.end(), std::size_t{0});
    const VerificationQuery query(l.net, l.input.features, FeaturePartition::from_free(l.net.input_dim(), free),
                                  f.epsilon, property, norm);
    auto backend = make_backend(f.backend, f.seed);
    const Verdict verdict = backend->check(query, Seconds(f.timeout));
    check_witness_contract(query, verdict);
    if (const auto* v = std::get_if<Violated>(&verdict)) {
        io::write_csv_input(witness_path, v->witness);
        out << "VIOLATED " << witness_path << "\n";
    } else {
        out << describe(verdict) << "\n";
    }
    return kExitOk;
}

int cmd_sensitivity(const CommonFlags& f, const std::string& out_path, const std::string& heatmap_path,
                    std::ostream& out) {
    Loaded l = load(f);
    const Transform transform{io::parse_transform(f.transform), 1.0};
    const std::vector<double> s = sensitivity(l.net, l.input.features, transform);
    nlohmann::json doc{{"transform", f.transform}, {"sensitivity", s}};
    io::write_text(out_path, doc.dump(2) + "\n");
    if (!heatmap_path.empty()) io::write_pgm(heatmap_path, io::heatmap(s, l.input.width, l.input.height));
    out << "wrote " << s.size() << " sensitivities\n";
    return kExitOk;
}

struct CompareFlags {
    std::string network;
    std::vector<std::string> inputs;
    std::string dataset;
    std::size_t count = 10;
    std::size_t offset = 0;
    std::size_t seeds = 20;
    double epsilon = 0.05;
    double timeout = 300.0;
    std::string transform = "reversal";
    std::size_t oracle_cap = 10;
    std::string out_dir = ".";
};

int cmd_compare(const CompareFlags& f, std::ostream& out) {
    const Network net = load_network(f.network);
    std::vector<std::vector<double>> inputs;
    for (const std::string& path : f.inputs) inputs.push_back(io::load_input(path).features);
    if (!f.dataset.empty()) {
        const auto samples = io::load_labeled_csv(f.dataset);
        for (std::size_t i = f.offset; i < samples.size() && i < f.offset + f.count; ++i) {
            inputs.push_back(samples[i].features);
        }
    }
    if (inputs.empty()) throw InvalidArgument("compare needs at least one input");
    for (const auto& x : inputs) validate_input(net, x);
    fs::create_directories(f.out_dir);

    VerixOptions base;
    base.epsilon = f.epsilon;
    base.per_query_time_limit = Seconds(f.timeout);
    base.traversal.transform.kind = io::parse_transform(f.transform);

    CompleteBackend complete;
    IncompleteBackend incomplete;

    std::ostringstream sizes;
    sizes << "input,traversal,seed,size\n";
    std::ostringstream tradeoff;
    tradeoff << "input,backend,size,unknown,mean_query_s\n";
    std::vector<VerificationQuery> oracle_queries;

    for (std::size_t n = 0; n < inputs.size(); ++n) {
        const std::vector<double>& x = inputs[n];
        VerixOptions sens = base;
        sens.traversal.kind = TraversalKind::Sensitivity;
        const Explanation ce = verix(net, x, sens, complete);
        sizes << n << ",sensitivity,," << ce.explanation.size() << "\n";
        for (std::size_t s = 0; s < f.seeds; ++s) {
            VerixOptions rnd = base;
            rnd.traversal.kind = TraversalKind::Random;
            rnd.traversal.seed = s;
            sizes << n << ",random," << s << "," << verix(net, x, rnd, complete).explanation.size() << "\n";
        }
        const Explanation ie = verix(net, x, sens, incomplete);
        for (const auto& [name, e] : {std::pair{"complete", &ce}, std::pair{"incomplete", &ie}}) {
            double total = 0.0;
            for (const StepRecord& st : e->steps) total += st.time_s;
            tradeoff << n << "," << name << "," << e->explanation.size() << "," << e->unknown.size() << ","
                     << total / static_cast<double>(std::max<std::size_t>(1, e->steps.size())) << "\n";
        }
        const Prediction p = predict(net, x);
        std::vector<std::size_t> b;
        for (const StepRecord& st : ce.steps) {
            VerificationQuery q = build_query(net, x, b, st.feature, f.epsilon, property_for(net, p, std::nullopt));
            if (oracle::unstable_count(q) <= f.oracle_cap) oracle_queries.push_back(std::move(q));
            if (st.verdict == VerdictKind::Holds) b.push_back(st.feature);
        }
    }

    oracle::CompareOptions co;
    co.time_limit = Seconds(f.timeout);
    co.max_unstable = f.oracle_cap;
    const oracle::ComparisonReport report = oracle::compare_backends(oracle_queries, co);

    io::write_text(fs::path(f.out_dir) / "traversal_sizes.csv", sizes.str());
    io::write_text(fs::path(f.out_dir) / "backend_tradeoff.csv", tradeoff.str());
    io::write_text(fs::path(f.out_dir) / "agreement.json", report.to_json());
    io::write_text(fs::path(f.out_dir) / "agreement.txt", report.to_text());
    out << "inputs: " << inputs.size() << ", oracle queries: " << oracle_queries.size()
        << ", complete/oracle disagreements: " << report.complete_disagreements << "\n";
    return report.ok() ? kExitOk : kExitContract;
}

struct TrainFlags {
    std::string data;
    std::string out;
    std::string hidden = "20,10";
    std::size_t epochs = 40;
    std::uint64_t seed = 1;
    std::optional<std::size_t> rows;
};

int cmd_train(const TrainFlags& f, std::ostream& out) {
    auto samples = io::load_labeled_csv(f.data);
    std::vector<io::LabeledSample> held_out;
    if (f.rows && *f.rows < samples.size()) {
        held_out.assign(samples.begin() + static_cast<std::ptrdiff_t>(*f.rows), samples.end());
        samples.resize(*f.rows);
    }
    if (samples.empty()) throw InvalidArgument("no training samples");
    train::TrainOptions options;
    options.hidden = parse_indices(f.hidden);
    options.epochs = f.epochs;
    options.seed = f.seed;
    std::size_t classes = 0;
    for (const auto& s : samples) classes = std::max(classes, s.label + 1);
    const Network net = train::train_classifier(samples, classes, options);
    save_network(net, f.out);
    out << "training accuracy: " << train::accuracy(net, samples) << "\n";
    if (!held_out.empty()) out << "held-out accuracy: " << train::accuracy(net, held_out) << "\n";
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"verix: verified explanations for feed-forward ReLU networks"};
    app.require_subcommand(1);

    CommonFlags common;
    std::string out_path;
    std::string mask_path;
    bool timings = false;

    auto* explain = app.add_subcommand("explain", "Compute an explanation and its counterfactuals");
    add_network_flags(explain, common);
    add_traversal_flags(explain, common);
    explain->add_option("--epsilon", common.epsilon, "Perturbation magnitude");
    explain->add_option("--out", out_path, "Explanation JSON output")->required();
    explain->add_option("--mask", mask_path, "Explanation mask PGM output");
    explain->add_flag("--with-timings", timings, "Record per-step wall time in the JSON");

    std::string epsilons;
    std::string map_path;
    auto* sweep = app.add_subcommand("sweep", "Explanations over a descending epsilon list");
    add_network_flags(sweep, common);
    add_traversal_flags(sweep, common);
    sweep->add_option("--epsilons", epsilons, "Comma-separated, strictly descending")->required();
    sweep->add_option("--out", out_path, "Epsilon map JSON output")->required();
    sweep->add_option("--colormap", map_path, "Gray-level map PGM output");

    std::string free_text;
    std::string witness_path = "witness.csv";
    auto* verify = app.add_subcommand("verify", "Check one perturbation query");
    add_network_flags(verify, common);
    verify->add_option("--seed", common.seed, "Falsifier seed");
    verify->add_option("--epsilon", common.epsilon, "Perturbation magnitude");
    verify->add_option("--free", free_text, "Comma-separated free feature indices (0-based), or 'all'")->required();
    verify->add_option("--witness", witness_path, "Where to write a counterexample");

    std::string heatmap_path;
    auto* sens = app.add_subcommand("sensitivity", "Feature-level sensitivity vector and heatmap");
    sens->add_option("--network", common.network, "Network JSON file")->required();
    sens->add_option("--input", common.input, "Input (.pgm image or flat CSV)")->required();
    sens->add_option("--transform", common.transform, "deletion|reversal")
        ->check(CLI::IsMember({"deletion", "reversal"}));
    sens->add_option("--out", out_path, "Sensitivity JSON output")->required();
    sens->add_option("--heatmap", heatmap_path, "Heatmap PGM output");

    CompareFlags cmp;
    auto* compare = app.add_subcommand("compare", "Backend agreement and traversal size experiments");
    compare->add_option("--network", cmp.network, "Network JSON file")->required();
    compare->add_option("--input", cmp.inputs, "Input files (repeatable)");
    compare->add_option("--dataset", cmp.dataset, "Labeled CSV (label,v1..vd with values 0..16)");
    compare->add_option("--count", cmp.count, "Dataset rows to use");
    compare->add_option("--offset", cmp.offset, "First dataset row");
    compare->add_option("--seeds", cmp.seeds, "Random traversal seeds per input");
    compare->add_option("--epsilon", cmp.epsilon, "Perturbation magnitude");
    compare->add_option("--timeout", cmp.timeout, "Per-query time limit in seconds");
    compare->add_option("--transform", cmp.transform, "Sensitivity transform")
        ->check(CLI::IsMember({"deletion", "reversal"}));
    compare->add_option("--oracle-cap", cmp.oracle_cap, "Max unstable ReLUs for the exhaustive oracle");
    compare->add_option("--out-dir", cmp.out_dir, "Report directory");

    TrainFlags tr;
    auto* trainer = app.add_subcommand("train", "Train a small dense classifier on a labeled CSV");
    trainer->add_option("--data", tr.data, "Labeled CSV")->required();
    trainer->add_option("--out", tr.out, "Network JSON output")->required();
    trainer->add_option("--hidden", tr.hidden, "Comma-separated hidden layer widths");
    trainer->add_option("--epochs", tr.epochs, "Training epochs");
    trainer->add_option("--seed", tr.seed, "Initialization and shuffling seed");
    trainer->add_option("--rows", tr.rows, "Train on the first N rows only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*explain) return cmd_explain(common, out_path, mask_path, timings, out);
        if (*sweep) return cmd_sweep(common, epsilons, out_path, map_path, out);
        if (*verify) return cmd_verify(common, free_text, witness_path, out);
        if (*sens) return cmd_sensitivity(common, out_path, heatmap_path, out);
        if (*compare) return cmd_compare(cmp, out);
        if (*trainer) return cmd_train(tr, out);
    } catch (const ContractViolation& e) {
        err << "error: contract breach: " << e.what() << "\n";
        return kExitContract;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace verix::cli
