#pragma once

#include <stdexcept>
#include <string>

namespace obox {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite input, non-positive lengths, empty regions where a region is required.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (thresholds, anchor specs, scheduler parameters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed file content; the message names the offending field and record.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed content whose values violate a range or consistency rule.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Synthetic scene generation could not satisfy its constraints within the retry budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace obox
