#pragma once

#include <stdexcept>
#include <string>

namespace superfast {

// Bad shapes, out-of-range parameters, non-finite entries.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A factorization failed to converge or produced garbage.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Forced truncation rank exceeds the numerical rank.
class RankDeficiencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// No spectral gap at the requested rank, so scores are not well defined.
class IllPosedScoresError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// A random sample lost rank (singular nucleus, empty plan, ...).
class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
public:
    ParseError(const std::string& what, long line)
        : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

} // namespace superfast
