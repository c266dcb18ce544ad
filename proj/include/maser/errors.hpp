#pragma once

#include <stdexcept>
#include <string>

namespace maser {

// Exit-code classes used by the command line front end.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MultistabilityError : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace maser
