#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace earnlm {

// Machine-parsable error codes. The CLI prints these on the diagnostic
// stream as `error[<name>]: <message>` before exiting nonzero.
enum class ErrorCode {
    io_error,
    schema_error,
    config_error,
    missing_data,
    unknown_metric,
    invalid_price,
    degenerate_estimate,
    network_error,
    provider_error,
    rate_limited,
    non_finite_input,
    corrupt_tensor,
    shape_mismatch,
    invalid_rank,
    sequence_too_long,
    empty_corpus,
    empty_dataset,
    empty_mask,
    empty_input,
    length_mismatch,
    non_finite_loss,
};

inline std::string_view error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::schema_error: return "schema_error";
        case ErrorCode::config_error: return "config_error";
        case ErrorCode::missing_data: return "missing_data";
        case ErrorCode::unknown_metric: return "unknown_metric";
        case ErrorCode::invalid_price: return "invalid_price";
        case ErrorCode::degenerate_estimate: return "degenerate_estimate";
        case ErrorCode::network_error: return "network_error";
        case ErrorCode::provider_error: return "provider_error";
        case ErrorCode::rate_limited: return "rate_limited";
        case ErrorCode::non_finite_input: return "non_finite_input";
        case ErrorCode::corrupt_tensor: return "corrupt_tensor";
        case ErrorCode::shape_mismatch: return "shape_mismatch";
        case ErrorCode::invalid_rank: return "invalid_rank";
        case ErrorCode::sequence_too_long: return "sequence_too_long";
        case ErrorCode::empty_corpus: return "empty_corpus";
        case ErrorCode::empty_dataset: return "empty_dataset";
        case ErrorCode::empty_mask: return "empty_mask";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::non_finite_loss: return "non_finite_loss";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised when a record lacks fields required by the requested dataset
// variant. Callers drop the row and keep the count.
class MissingDataError : public Error {
public:
    explicit MissingDataError(std::vector<std::string> missing)
        : Error(ErrorCode::missing_data, join(missing)), missing_(std::move(missing)) {}

    const std::vector<std::string>& missing_fields() const noexcept { return missing_; }

private:
    static std::string join(const std::vector<std::string>& fields) {
        std::string s = "missing fields:";
        for (const auto& f : fields) {
            s += ' ';
            s += f;
        }
        return s;
    }

    std::vector<std::string> missing_;
};

// Fixture parse failure, carries the index of the offending entry.
class SchemaError : public Error {
public:
    SchemaError(std::size_t entry_index, const std::string& message)
        : Error(ErrorCode::schema_error,
                "entry " + std::to_string(entry_index) + ": " + message),
          entry_index_(entry_index) {}

    std::size_t entry_index() const noexcept { return entry_index_; }

private:
    std::size_t entry_index_;
};

}  // namespace earnlm
