#pragma once

#include <stdexcept>
#include <string>

namespace coclab {

// Base class for all library errors. The harness maps these to structured
// stage failures; everything else escaping a stage is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularOperator : public Error {
public:
    explicit SingularOperator(const std::string& msg) : Error(msg) {}
};

class ForbiddenWrap : public Error {
public:
    explicit ForbiddenWrap(const std::string& msg) : Error(msg) {}
};

class IllConditionedClosing : public Error {
public:
    explicit IllConditionedClosing(const std::string& msg) : Error(msg) {}
};

class WindowExhausted : public Error {
public:
    explicit WindowExhausted(const std::string& msg) : Error(msg) {}
};

class MissingWord : public Error {
public:
    explicit MissingWord(const std::string& msg) : Error(msg) {}
};

class IncompatibleSampler : public Error {
public:
    explicit IncompatibleSampler(const std::string& msg) : Error(msg) {}
};

class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& msg) : Error(msg) {}
};

class CalibrationFailed : public Error {
public:
    explicit CalibrationFailed(const std::string& msg) : Error(msg) {}
};

class ProfileViolated : public Error {
public:
    explicit ProfileViolated(const std::string& msg) : Error(msg) {}
};

class BoundsViolation : public Error {
public:
    explicit BoundsViolation(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace coclab
