#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "verix/explain.hpp"

namespace verix::io {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
    std::uint8_t maxval = 255;
};

// Binary 8-bit PGM (P5). Comments in the header are skipped.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(const std::string& bytes, const std::string& source = "<memory>");

// An input vector plus its spatial shape (height 1 for flat CSV inputs).
struct InputSample {
    std::vector<double> features;
    std::size_t width = 0;
    std::size_t height = 1;
    bool is_image = false;
};

// .pgm is read as an image normalized by /maxval; anything else as flat CSV
// (commas, whitespace or newlines between values).
InputSample load_input(const std::filesystem::path& path);
void write_csv_input(const std::filesystem::path& path, const std::vector<double>& features);

struct LabeledSample {
    std::size_t label = 0;
    std::vector<double> features;
};

// Rows of "label,v1,...,vd" with integer intensities in [0, max_value].
std::vector<LabeledSample> load_labeled_csv(const std::filesystem::path& path, double max_value = 16.0);

// 255 for explanation features, 0 for irrelevant ones.
GrayImage explanation_mask(const Explanation& explanation, std::size_t width, std::size_t height);

// Irrelevant-at-epsilon map: features never irrelevant are brightest (255);
// the others get evenly spaced levels, darker for larger epsilon.
GrayImage sweep_colormap(const EpsilonMap& map, std::size_t width, std::size_t height);

// Linearly rescales |values| into 0..255.
GrayImage heatmap(const std::vector<double>& values, std::size_t width, std::size_t height);

std::string explanation_to_json(const Explanation& explanation, bool include_timing = true);
Explanation explanation_from_json(const std::string& text);

std::string epsilon_map_to_json(const EpsilonMap& map);

std::string traversal_kind_name(TraversalKind kind);
TraversalKind parse_traversal_kind(const std::string& text);
std::string transform_name(TransformKind kind);
TransformKind parse_transform(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace verix::io
