// Error taxonomy shared across the library. The CLI maps these to exit codes
// (config -> 1, data -> 2, numeric -> 3).
#pragma once

#include <stdexcept>
#include <string>

namespace pkt {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or usage.
struct config_error : error {
    using error::error;
};

// Bad input data: malformed records, referential integrity, missing artifacts.
struct data_error : error {
    using error::error;
};

struct parse_error : data_error {
    using data_error::data_error;
};

// Tensor shape mismatch.
struct dim_error : error {
    using error::error;
};

// Out-of-range index into a tensor or table.
struct index_error : error {
    using error::error;
};

// API misuse: broken precondition that is a programming error, not bad data.
struct contract_error : error {
    using error::error;
};

// Loss or metric became non-finite.
struct numeric_error : error {
    using error::error;
};

// Metric preconditions violated (e.g. single-class AUC input).
struct metric_error : error {
    using error::error;
};

// A label class is missing from a training split.
struct stratification_error : data_error {
    using data_error::data_error;
};

}  // namespace pkt
