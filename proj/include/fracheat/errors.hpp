#pragma once

#include <stdexcept>
#include <string>

namespace fracheat {

// Error classes double as process exit codes for the command line front end:
// usage/input errors -> 2, numerical failures -> 3, resource exhaustion -> 4.
enum class ErrorClass : int { usage = 2, numerical = 3, resource = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg)
        : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }
    int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
    ErrorClass cls_;
};

// A transform grid was too coarse for the requested spatial box.
struct GridTooSmall : Error {
    explicit GridTooSmall(const std::string& m) : Error(ErrorClass::usage, m) {}
};

// An inverse transform that should be real carried a non-negligible
// imaginary part (> 1e-9 relative).
struct NonRealOutput : Error {
    explicit NonRealOutput(const std::string& m) : Error(ErrorClass::numerical, m) {}
};

// Grid refinement stalled before the requested tolerance was met.
struct ToleranceUnreachable : Error {
    explicit ToleranceUnreachable(const std::string& m) : Error(ErrorClass::numerical, m) {}
};

// A spatial box (or its transform workspace) would exceed the memory cap.
struct BoxOverflow : Error {
    explicit BoxOverflow(const std::string& m) : Error(ErrorClass::resource, m) {}
};

// Increment shift larger than half the synthesized box.
struct ShiftTooLarge : Error {
    explicit ShiftTooLarge(const std::string& m) : Error(ErrorClass::usage, m) {}
};

// All sweep values collapsed below the representable range; no rate can be fit.
struct DegenerateSweep : Error {
    explicit DegenerateSweep(const std::string& m) : Error(ErrorClass::numerical, m) {}
};

// A bracketing scan ran out of its search range.
struct ScanExhausted : Error {
    explicit ScanExhausted(const std::string& m) : Error(ErrorClass::numerical, m) {}
};

// A threshold search exceeded its iteration budget.
struct NotReached : Error {
    explicit NotReached(const std::string& m) : Error(ErrorClass::numerical, m) {}
};

// Quadrature refinement stopped making progress.
struct QuadratureStalled : Error {
    explicit QuadratureStalled(const std::string& m) : Error(ErrorClass::numerical, m) {}
};

// The selected vertex subset is not connected inside the host graph.
struct DisconnectedOmega : Error {
    explicit DisconnectedOmega(const std::string& m) : Error(ErrorClass::usage, m) {}
};

// No edge leaves the selected subset. Fatal for s = 1 (the Dirichlet
// condition degenerates); callers treat it as a warning for s < 1.
struct EmptyBoundary : Error {
    explicit EmptyBoundary(const std::string& m) : Error(ErrorClass::usage, m) {}
};

} // namespace fracheat
