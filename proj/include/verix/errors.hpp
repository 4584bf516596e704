#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace verix {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent network. `layer` names the offending layer.
class ModelError : public Error {
public:
    ModelError(const std::string& what, std::optional<std::size_t> layer = std::nullopt)
        : Error(layer ? "layer " + std::to_string(*layer) + ": " + what : what), layer_(layer) {}
    std::optional<std::size_t> layer() const { return layer_; }

private:
    std::optional<std::size_t> layer_;
};

// File-level parse failure, with the file path and a location hint.
class ParseError : public Error {
public:
    ParseError(const std::string& source, const std::string& where, const std::string& what)
        : Error(source + ": " + where + ": " + what) {}
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class UnsupportedNorm : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// A caller or backend broke a documented contract (e.g. a witness that does
// not re-check). Never recoverable inside a run.
class ContractViolation : public Error {
public:
    using Error::Error;
};

}  // namespace verix
