#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace svgdet {

// Exit-code families surfaced by the CLI: I/O=2, format=3, shape/config=4, numeric=5.
enum class ErrorFamily : int { Io = 2, Format = 3, Config = 4, Numeric = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), family_(family), code_(std::move(code)) {}

    ErrorFamily family() const { return family_; }
    const std::string& code() const { return code_; }
    int exit_code() const { return static_cast<int>(family_); }

private:
    ErrorFamily family_;
    std::string code_;
};

inline Error empty_input(const std::string& msg) { return Error(ErrorFamily::Io, "EmptyInput", msg); }
inline Error oversize_input(const std::string& msg) { return Error(ErrorFamily::Format, "OversizeInput", msg); }
inline Error file_unreadable(const std::string& msg) { return Error(ErrorFamily::Io, "FileUnreadable", msg); }
inline Error all_lines_rejected(const std::string& msg) { return Error(ErrorFamily::Format, "AllLinesRejected", msg); }
inline Error dimension_too_small(const std::string& msg) { return Error(ErrorFamily::Config, "DimensionTooSmall", msg); }
inline Error empty_token_list(const std::string& msg) { return Error(ErrorFamily::Config, "EmptyTokenList", msg); }
inline Error shape_mismatch(const std::string& msg) { return Error(ErrorFamily::Config, "ShapeMismatch", msg); }
inline Error too_few_samples(const std::string& msg) { return Error(ErrorFamily::Config, "TooFewSamples", msg); }
inline Error ratio_out_of_range(const std::string& msg) { return Error(ErrorFamily::Config, "RatioOutOfRange", msg); }
inline Error config_error(const std::string& msg) { return Error(ErrorFamily::Config, "ConfigError", msg); }
inline Error non_symmetric_input(const std::string& msg) { return Error(ErrorFamily::Numeric, "NonSymmetricInput", msg); }
inline Error invalid_distribution(const std::string& msg) { return Error(ErrorFamily::Numeric, "InvalidDistribution", msg); }
inline Error non_finite_gradient(const std::string& msg) { return Error(ErrorFamily::Numeric, "NonFiniteGradient", msg); }
inline Error format_error(const std::string& msg) { return Error(ErrorFamily::Format, "FormatError", msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorFamily::Io, "IoError", msg); }

}  // namespace svgdet
