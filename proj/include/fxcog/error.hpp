#pragma once

#include <stdexcept>
#include <string>

namespace fxcog {

// Every failure raised by the library derives from Error. The category maps
// onto the CLI exit codes (usage = 1, data = 2, runtime = 3).
enum class ErrorCategory { usage, data, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define FXCOG_DEFINE_ERROR(Name, Category)                                     \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what)                                 \
            : Error(ErrorCategory::Category, what) {}                          \
    };

FXCOG_DEFINE_ERROR(ParseError, data)
FXCOG_DEFINE_ERROR(ValidationError, data)
FXCOG_DEFINE_ERROR(EmptyInputError, data)
FXCOG_DEFINE_ERROR(CoverageError, data)
FXCOG_DEFINE_ERROR(PreconditionError, runtime)
FXCOG_DEFINE_ERROR(ShapeError, runtime)
FXCOG_DEFINE_ERROR(ComputationError, runtime)
FXCOG_DEFINE_ERROR(ConfigError, usage)
FXCOG_DEFINE_ERROR(UndefinedMetricError, runtime)
FXCOG_DEFINE_ERROR(DegenerateSignalError, runtime)
FXCOG_DEFINE_ERROR(IoError, data)

#undef FXCOG_DEFINE_ERROR

class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(int epoch, const std::string& what)
        : Error(ErrorCategory::runtime, what), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace fxcog
