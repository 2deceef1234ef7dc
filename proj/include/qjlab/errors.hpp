#pragma once

#include <stdexcept>
#include <string>

namespace qjl {

#define QJL_ERROR(Name)                                   \
    struct Name : std::runtime_error {                    \
        explicit Name(const std::string& msg)             \
            : std::runtime_error(#Name ": " + msg) {}     \
    }

QJL_ERROR(DomainError);
QJL_ERROR(PrecisionExhausted);
QJL_ERROR(Overflow);
QJL_ERROR(WindowTooLarge);
QJL_ERROR(WindowTooSmall);
QJL_ERROR(SingularStep);
QJL_ERROR(ZeroInWindow);
QJL_ERROR(ExactZeroTerm);
QJL_ERROR(NoQualifyingDenominator);
QJL_ERROR(RangeTooShort);
QJL_ERROR(NotConverged);
QJL_ERROR(BudgetExceeded);
QJL_ERROR(NonAnalyticInput);
QJL_ERROR(EmptyLevelSet);
QJL_ERROR(NotFound);
QJL_ERROR(DegenerateZeros);
QJL_ERROR(DegenerateDiagonalization);
QJL_ERROR(LeakageExceeded);
QJL_ERROR(GridTooCoarse);
QJL_ERROR(Unclassifiable);
QJL_ERROR(ConfigInvalid);
QJL_ERROR(IoError);

#undef QJL_ERROR

}  // namespace qjl
