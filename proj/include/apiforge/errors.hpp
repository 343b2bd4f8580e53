#pragma once
#include <stdexcept>
#include <string>
#include <utility>

namespace apiforge {

// All failures carry a stable machine-readable code next to the human message.
// CLI prints "<code>: <detail>" on one line; tests match on code().
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

} // namespace apiforge
