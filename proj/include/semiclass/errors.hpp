#pragma once

#include <stdexcept>
#include <string>

namespace semiclass {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SEMICLASS_ERROR(Name)                        \
    class Name : public Error {                      \
    public:                                          \
        explicit Name(const std::string& what)       \
            : Error(#Name ": " + what) {}            \
    }

SEMICLASS_ERROR(DegenerateInput);
SEMICLASS_ERROR(NotInSpan);
SEMICLASS_ERROR(AmbiguousResonance);
SEMICLASS_ERROR(SingularPoint);
SEMICLASS_ERROR(PreconditionFailed);
SEMICLASS_ERROR(TruncationError);
SEMICLASS_ERROR(OutOfChart);
SEMICLASS_ERROR(ChartSingular);
SEMICLASS_ERROR(InvalidRecipe);
SEMICLASS_ERROR(EmptyCluster);
SEMICLASS_ERROR(ShapeError);
SEMICLASS_ERROR(ConfigError);
SEMICLASS_ERROR(AmbiguousExtraction);

#undef SEMICLASS_ERROR

}  // namespace semiclass
