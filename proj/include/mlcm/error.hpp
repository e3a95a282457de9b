#pragma once

#include <stdexcept>
#include <string>

namespace mlcm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Malformed input file; carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what_arg)
        : Error("line " + std::to_string(line) + ": " + what_arg), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Violated operation precondition or argument outside its domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what_arg) : Error(what_arg) {}
};

} // namespace mlcm
