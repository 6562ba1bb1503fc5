#pragma once

#include <stdexcept>
#include <string>

namespace besovlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define BESOVLAB_DEFINE_ERROR(Name)                                           \
    struct Name : Error {                                                     \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}  \
    }

BESOVLAB_DEFINE_ERROR(EmptyDomain);
BESOVLAB_DEFINE_ERROR(InvalidExponent);
BESOVLAB_DEFINE_ERROR(NotSymmetric);
BESOVLAB_DEFINE_ERROR(ConvergenceFailure);
BESOVLAB_DEFINE_ERROR(NonFiniteSymbol);
BESOVLAB_DEFINE_ERROR(NegativeTime);
BESOVLAB_DEFINE_ERROR(DomainMismatch);
BESOVLAB_DEFINE_ERROR(GridTooSmall);
BESOVLAB_DEFINE_ERROR(WindowTooNarrow);
BESOVLAB_DEFINE_ERROR(QuadratureUnresolved);
BESOVLAB_DEFINE_ERROR(TooFewPoints);
BESOVLAB_DEFINE_ERROR(NonPositiveValue);
BESOVLAB_DEFINE_ERROR(GridNotSorted);
BESOVLAB_DEFINE_ERROR(ConfigError);
BESOVLAB_DEFINE_ERROR(IoError);

#undef BESOVLAB_DEFINE_ERROR

} // namespace besovlab
