#pragma once

#include <stdexcept>
#include <string>

namespace depthfilter {

/// Malformed input file (bad number, ragged rows, missing header).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid option values or combinations.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: non-SPD scatter, degenerate estimator input, etc.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace depthfilter
