#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "verix/errors.hpp"
#include "verix/io.hpp"

namespace verix::io {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::string& bytes, std::size_t& pos) {
    for (;;) {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
    return bytes.substr(start, pos - start);
}

std::size_t header_number(const std::string& bytes, std::size_t& pos, const std::string& source, const char* what) {
    const std::string token = header_token(bytes, pos);
    if (token.empty() || !std::ranges::all_of(token, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw ParseError(source, "header", std::string("invalid ") + what + " '" + token + "'");
    }
    return std::stoul(token);
}

void require_shape(std::size_t features, std::size_t width, std::size_t height) {
    if (features != width * height) {
        throw InvalidArgument(std::to_string(features) + " features do not fit a " + std::to_string(width) + "x" +
                              std::to_string(height) + " image");
    }
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), "open", "cannot read file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

GrayImage decode_pgm(const std::string& bytes, const std::string& source) {
    std::size_t pos = 0;
    if (header_token(bytes, pos) != "P5") throw ParseError(source, "magic", "expected binary PGM (P5)");
    GrayImage img;
    img.width = header_number(bytes, pos, source, "width");
    img.height = header_number(bytes, pos, source, "height");
    const std::size_t maxval = header_number(bytes, pos, source, "maxval");
    if (img.width == 0 || img.height == 0) throw ParseError(source, "header", "empty image");
    if (maxval == 0 || maxval > 255) throw ParseError(source, "header", "only 8-bit PGM is supported");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw ParseError(source, "header", "missing separator before raster");
    }
    ++pos;
    const std::size_t count = img.width * img.height;
    if (bytes.size() - pos < count) {
        throw ParseError(source, "raster", "expected " + std::to_string(count) + " bytes, found " +
                                               std::to_string(bytes.size() - pos));
    }
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
    img.maxval = static_cast<std::uint8_t>(maxval);
    if (std::ranges::any_of(img.pixels, [&](std::uint8_t p) { return p > maxval; })) {
        throw ParseError(source, "raster", "pixel exceeds maxval");
    }
    return img;
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_text(path), path.string()); }

std::string encode_pgm(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n" +
                      std::to_string(image.maxval) + "\n";
    out.append(image.pixels.begin(), image.pixels.end());
    return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) { write_text(path, encode_pgm(image)); }

InputSample load_input(const std::filesystem::path& path) {
    InputSample sample;
    if (path.extension() == ".pgm") {
        const GrayImage img = read_pgm(path);
        sample.width = img.width;
        sample.height = img.height;
        sample.is_image = true;
        sample.features.reserve(img.pixels.size());
        for (std::uint8_t p : img.pixels) sample.features.push_back(p / static_cast<double>(img.maxval));
        return sample;
    }
    std::string text = read_text(path);
    std::ranges::replace(text, ',', ' ');
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw ParseError(path.string(), "value " + std::to_string(sample.features.size()), "not a number: " + token);
        }
        sample.features.push_back(v);
    }
    if (sample.features.empty()) throw ParseError(path.string(), "content", "no values");
    sample.width = sample.features.size();
    return sample;
}

void write_csv_input(const std::filesystem::path& path, const std::vector<double>& features) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < features.size(); ++i) out << (i ? "," : "") << features[i];
    out << '\n';
    write_text(path, out.str());
}

GrayImage explanation_mask(const Explanation& explanation, std::size_t width, std::size_t height) {
    require_shape(explanation.order.size(), width, height);
    GrayImage img{width, height, std::vector<std::uint8_t>(width * height, 0)};
    for (std::size_t i : explanation.explanation) img.pixels[i] = 255;
    return img;
}

GrayImage sweep_colormap(const EpsilonMap& map, std::size_t width, std::size_t height) {
    require_shape(map.smallest_irrelevant.size(), width, height);
    GrayImage img{width, height, std::vector<std::uint8_t>(width * height, 255)};
    const std::size_t levels = map.epsilons.size();
    for (std::size_t i = 0; i < map.smallest_irrelevant.size(); ++i) {
        const auto& eps = map.smallest_irrelevant[i];
        if (!eps) continue;
        const auto idx = static_cast<std::size_t>(std::ranges::find(map.epsilons, *eps) - map.epsilons.begin());
        // idx 0 (largest epsilon) is darkest; idx levels-1 sits just below white.
        img.pixels[i] = static_cast<std::uint8_t>((255 * idx) / levels);
    }
    return img;
}

GrayImage heatmap(const std::vector<double>& values, std::size_t width, std::size_t height) {
    require_shape(values.size(), width, height);
    GrayImage img{width, height, std::vector<std::uint8_t>(width * height, 0)};
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < values.size(); ++i) {
        img.pixels[i] = peak > 0.0 ? static_cast<std::uint8_t>(std::lround(255.0 * std::abs(values[i]) / peak)) : 0;
    }
    return img;
}

}  // namespace verix::io
