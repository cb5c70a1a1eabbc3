#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace effparse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed bracketed input; offset is the character position of the fault.
class ParseFormatError : public Error {
public:
    ParseFormatError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class DegenerateTreeError : public Error {
public:
    using Error::Error;
};

class SplitError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class ModelDomainError : public Error {
public:
    using Error::Error;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class EvalDomainError : public Error {
public:
    EvalDomainError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Left-corner relation whose closure cannot be inverted.
class LeftCornerError : public Error {
public:
    using Error::Error;
};

class SerializationError : public Error {
public:
    using Error::Error;
};

}  // namespace effparse
