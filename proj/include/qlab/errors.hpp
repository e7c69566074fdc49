#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

// Every library failure carries a stable name so the CLI can map it to an
// exit code and print it verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& detail)
        : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }
    // true for failures caused by a numeric budget rather than bad input
    virtual bool budget() const noexcept { return false; }

private:
    std::string name_;
};

class BudgetError : public Error {
public:
    using Error::Error;
    bool budget() const noexcept override { return true; }
};

#define QLAB_ERROR(Name)                                                   \
    struct Name : Error {                                                  \
        explicit Name(const std::string& d) : Error(#Name, d) {}           \
    }
#define QLAB_BUDGET_ERROR(Name)                                            \
    struct Name : BudgetError {                                            \
        explicit Name(const std::string& d) : BudgetError(#Name, d) {}     \
    }

QLAB_ERROR(NonConvexInput);
QLAB_ERROR(OriginNotInterior);
QLAB_ERROR(NormalizationFailure);
QLAB_ERROR(DegenerateArc);
QLAB_ERROR(ZeroArgument);
QLAB_ERROR(DomainError);
QLAB_ERROR(InvalidDelta);
QLAB_BUDGET_ERROR(ResolutionTooCoarse);
QLAB_ERROR(NonConvexArc);
QLAB_BUDGET_ERROR(ArcTooCoarse);
QLAB_BUDGET_ERROR(BudgetExceeded);
QLAB_ERROR(InvalidScale);
QLAB_BUDGET_ERROR(TailNotDecaying);
QLAB_BUDGET_ERROR(AliasingRisk);
QLAB_BUDGET_ERROR(QuadratureBudget);
QLAB_ERROR(CubeTooSmall);
QLAB_BUDGET_ERROR(TGridTooCoarse);
QLAB_ERROR(ConfigError);

#undef QLAB_ERROR
#undef QLAB_BUDGET_ERROR

}  // namespace qlab
