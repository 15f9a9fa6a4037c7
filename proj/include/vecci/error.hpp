#pragma once

#include <stdexcept>
#include <string>

namespace vecci {

// Bad arguments, malformed configs, violated preconditions.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Not enough rows for the requested conditioning / regression.
class sample_size_error : public input_error {
public:
    explicit sample_size_error(const std::string& what) : input_error(what) {}
};

// Numerically unusable data: zero-variance residuals, singular covariance.
class degenerate_data_error : public std::runtime_error {
public:
    explicit degenerate_data_error(const std::string& what) : std::runtime_error(what) {}
};

// Requested exhaustive enumeration beyond the configured size cap.
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// File / stream problems surfaced by the CLI and report writers.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vecci
