#pragma once

#include <stdexcept>
#include <string>

namespace catmap {

/// Data or usage error carrying a short machine-readable code
/// (e.g. "ragged_row", "empty_table").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace catmap
