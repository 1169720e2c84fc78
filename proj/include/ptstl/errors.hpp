// ============================================================================
// ptstl/errors.hpp — error types shared across the library
// ============================================================================
//
// Three failure classes, mirrored by the CLI exit codes:
//   ValidationError — malformed data, contract violations, bad configuration
//   ParseError      — ValidationError specialised with a source span
//   BudgetError     — an explicit search/rewrite budget was exceeded; never
//                     reported as a silent truncation or a fake verdict
// ============================================================================

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptstl {

// Byte offsets [start, end) into the input text of a parse.
struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, SourceSpan span)
        : ValidationError(msg + " (at byte " + std::to_string(span.start) + ".." +
                          std::to_string(span.end) + ")"),
          span_(span) {}

    SourceSpan span() const noexcept { return span_; }

private:
    SourceSpan span_;
};

class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& msg) : Error(msg) {}
};

}  // namespace ptstl
