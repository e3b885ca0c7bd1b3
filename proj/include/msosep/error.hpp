#pragma once

#include <stdexcept>
#include <string>

namespace msosep {

// kind is the error tag (SyntaxError, ArityMismatch, CapExceeded, ...)
class Error : public std::runtime_error {
public:
    Error(std::string kind, std::string detail = {})
        : std::runtime_error(detail.empty() ? kind : kind + ": " + detail),
          kind_(std::move(kind)), detail_(std::move(detail)) {}

    const std::string& kind() const { return kind_; }
    const std::string& detail() const { return detail_; }

    // caps and budgets map to CLI exit code 2
    bool is_cap() const {
        return kind_ == "CapExceeded" || kind_ == "TypeExplosion" || kind_ == "TooLarge" ||
               kind_ == "TimeCap" || kind_ == "TooManyTypes";
    }

private:
    std::string kind_;
    std::string detail_;
};

}  // namespace msosep
