#pragma once

#include <stdexcept>
#include <string>

namespace coopsense {

/// Invalid scenario or parameter values. Raised at load/validation time.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called outside its precondition (stepping a stopped test, empty input, ...).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A numerical routine could not produce a meaningful answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace coopsense
