#include <sstream>

#include "verix/errors.hpp"
#include "verix/io.hpp"

namespace verix::io {

std::vector<LabeledSample> load_labeled_csv(const std::filesystem::path& path, double max_value) {
    std::istringstream in(read_text(path));
    std::vector<LabeledSample> samples;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream fields(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(fields, field, ',')) {
            try {
                values.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ParseError(path.string(), "line " + std::to_string(line_no), "not a number: " + field);
            }
        }
        if (values.size() < 2) throw ParseError(path.string(), "line " + std::to_string(line_no), "too few columns");
        if (width == 0) width = values.size();
        if (values.size() != width) throw ParseError(path.string(), "line " + std::to_string(line_no), "column count differs");
        LabeledSample s;
        s.label = static_cast<std::size_t>(values.front());
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (values[i] < 0.0 || values[i] > max_value) {
                throw ParseError(path.string(), "line " + std::to_string(line_no), "value outside [0, max]");
            }
            s.features.push_back(values[i] / max_value);
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace verix::io
