#include <fstream>
#include <sstream>

#include <json.hpp>

#include "verix/errors.hpp"
#include "verix/model.hpp"

namespace verix {
namespace {

using nlohmann::json;

struct Parser {
    std::string source;

    [[noreturn]] void fail(const std::string& where, const std::string& what) const {
        throw ParseError(source, where, what);
    }

    std::size_t positive(const json& j, const std::string& where) const {
        if (!j.is_number_integer() || j.get<long long>() <= 0) fail(where, "expected a positive integer");
        return j.get<std::size_t>();
    }

    std::vector<double> vector(const json& j, const std::string& where) const {
        if (!j.is_array()) fail(where, "expected an array of numbers");
        std::vector<double> v;
        v.reserve(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) fail(where + "[" + std::to_string(i) + "]", "expected a number");
            v.push_back(j[i].get<double>());
        }
        return v;
    }

    Matrix matrix(const json& j, const std::string& where) const {
        if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < j.size(); ++r) {
            rows.push_back(vector(j[r], where + "[" + std::to_string(r) + "]"));
            if (rows.back().size() != rows.front().size()) {
                fail(where + "[" + std::to_string(r) + "]", "row length differs from row 0");
            }
        }
        return Matrix::from_rows(rows);
    }

    // Flattens a nested numeric array of the given depth, recording its shape.
    void flatten(const json& j, std::size_t depth, std::vector<std::size_t>& shape, std::size_t level,
                 std::vector<double>& out, const std::string& where) const {
        if (level == depth) {
            if (!j.is_number()) fail(where, "expected a number");
            out.push_back(j.get<double>());
            return;
        }
        if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array");
        if (shape.size() <= level) shape.push_back(j.size());
        else if (shape[level] != j.size()) fail(where, "ragged kernel array");
        for (std::size_t i = 0; i < j.size(); ++i) {
            flatten(j[i], depth, shape, level + 1, out, where + "[" + std::to_string(i) + "]");
        }
    }

    std::size_t nesting(const json& j) const {
        std::size_t depth = 0;
        const json* cur = &j;
        while (cur->is_array() && !cur->empty()) {
            ++depth;
            cur = &cur->front();
        }
        return depth;
    }

    Conv2dSpec conv(const json& layer, const std::string& where) const {
        Conv2dSpec spec;
        if (!layer.contains("input_shape")) fail(where, "conv2d requires \"input_shape\"");
        const json& shape = layer["input_shape"];
        if (!shape.is_array() || (shape.size() != 2 && shape.size() != 3)) {
            fail(where + ".input_shape", "expected [height, width] or [channels, height, width]");
        }
        std::size_t idx = 0;
        if (shape.size() == 3) spec.in_channels = positive(shape[idx++], where + ".input_shape[0]");
        spec.in_height = positive(shape[idx], where + ".input_shape");
        spec.in_width = positive(shape[idx + 1], where + ".input_shape");

        if (!layer.contains("kernel")) fail(where, "conv2d requires \"kernel\"");
        const json& kernel = layer["kernel"];
        const std::size_t depth = nesting(kernel);
        std::vector<std::size_t> kshape;
        if (depth == 2) {
            flatten(kernel, 2, kshape, 0, spec.kernel, where + ".kernel");
            if (spec.in_channels != 1) fail(where + ".kernel", "2-D kernel requires a single input channel");
            spec.out_channels = 1;
            spec.kernel_height = kshape[0];
            spec.kernel_width = kshape[1];
        } else if (depth == 4) {
            flatten(kernel, 4, kshape, 0, spec.kernel, where + ".kernel");
            spec.out_channels = kshape[0];
            if (kshape[1] != spec.in_channels) fail(where + ".kernel", "kernel input channels differ from input_shape");
            spec.kernel_height = kshape[2];
            spec.kernel_width = kshape[3];
        } else {
            fail(where + ".kernel", "expected [kh][kw] or [out][in][kh][kw] nesting");
        }
        if (layer.contains("stride")) spec.stride = positive(layer["stride"], where + ".stride");
        if (layer.contains("padding")) {
            const json& p = layer["padding"];
            if (!p.is_number_integer() || p.get<long long>() < 0) fail(where + ".padding", "expected a non-negative integer");
            spec.padding = p.get<std::size_t>();
        }
        if (layer.contains("bias")) spec.bias = vector(layer["bias"], where + ".bias");
        return spec;
    }

    Network network(const json& doc) const {
        if (!doc.is_object()) fail("$", "expected a JSON object");
        if (!doc.contains("task") || !doc["task"].is_string()) fail("$.task", "missing task");
        const std::string task_name = doc["task"].get<std::string>();
        Task task;
        if (task_name == "classification") task = Task::Classification;
        else if (task_name == "regression") task = Task::Regression;
        else fail("$.task", "unknown task '" + task_name + "'");

        if (!doc.contains("input_dim")) fail("$.input_dim", "missing input_dim");
        const std::size_t input_dim = positive(doc["input_dim"], "$.input_dim");

        if (!doc.contains("layers") || !doc["layers"].is_array()) fail("$.layers", "missing layer list");
        std::vector<Layer> layers;
        std::size_t dim = input_dim;
        for (std::size_t k = 0; k < doc["layers"].size(); ++k) {
            const json& layer = doc["layers"][k];
            const std::string where = "$.layers[" + std::to_string(k) + "]";
            if (!layer.is_object() || !layer.contains("type") || !layer["type"].is_string()) {
                fail(where, "layer needs a string \"type\"");
            }
            const std::string type = layer["type"].get<std::string>();
            if (type == "affine") {
                if (!layer.contains("weights") || !layer.contains("bias")) fail(where, "affine needs weights and bias");
                layers.emplace_back(AffineLayer{matrix(layer["weights"], where + ".weights"),
                                                vector(layer["bias"], where + ".bias")});
            } else if (type == "relu") {
                layers.emplace_back(ReluLayer{dim});
            } else if (type == "conv2d") {
                try {
                    layers.emplace_back(lower_conv2d(conv(layer, where)));
                } catch (const ModelError& e) {
                    fail(where, e.what());
                }
            } else {
                fail(where, "unsupported layer type '" + type + "'");
            }
            dim = layer_out_dim(layers.back());
        }
        try {
            return Network(task, input_dim, std::move(layers));
        } catch (const ModelError& e) {
            const std::string where = e.layer() ? "$.layers[" + std::to_string(*e.layer()) + "]" : "$";
            fail(where, e.what());
        }
    }
};

}  // namespace

Network parse_network(const std::string& json_text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(source, "byte " + std::to_string(e.byte), e.what());
    }
    return Parser{source}.network(doc);
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "open", "cannot read file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_network(buffer.str(), path.string());
}

std::string network_to_json(const Network& net) {
    json doc;
    doc["task"] = net.task() == Task::Classification ? "classification" : "regression";
    doc["input_dim"] = net.input_dim();
    doc["layers"] = json::array();
    for (const Layer& layer : net.layers()) {
        if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            json weights = json::array();
            for (std::size_t r = 0; r < affine->out_dim(); ++r) {
                const auto row = affine->weights.row(r);
                weights.push_back(std::vector<double>(row.begin(), row.end()));
            }
            doc["layers"].push_back({{"type", "affine"}, {"weights", weights}, {"bias", affine->bias}});
        } else {
            doc["layers"].push_back({{"type", "relu"}});
        }
    }
    return doc.dump();
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << network_to_json(net) << '\n';
}

}  // namespace verix
