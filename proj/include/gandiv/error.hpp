#pragma once

#include <stdexcept>
#include <string>

namespace gandiv {

// File/format/data problems (bad PGM header, ragged CSV, missing file).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failures (eigensolver non-convergence, non-PSD input, divergence).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gandiv
