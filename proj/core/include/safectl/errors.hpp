#pragma once

#include <stdexcept>
#include <string>

namespace safectl {

/// Base class for all safectl runtime errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A function evaluation produced NaN/Inf; message names the offending coordinate.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// The pointwise constraint set is empty: L_g h = 0 (or the QP is infeasible)
/// while the drift condition is violated. The barrier is not a valid CBF at
/// this state.
class InfeasiblePointwise : public Error {
public:
    using Error::Error;
};

/// L_g V = 0 with the decay condition violated: V fails the CLF inequality here.
class NotACLFHere : public Error {
public:
    using Error::Error;
};

/// A pole-placement request contained a nonpositive pole.
class InvalidPoles : public Error {
public:
    using Error::Error;
};

/// L_g L_f^{r-1} h vanished where the constraint row needs it.
class RelativeDegreeViolation : public Error {
public:
    using Error::Error;
};

/// Initial-state validation was asked about a state with h(x0) < 0.
class OutsideSafeSet : public Error {
public:
    using Error::Error;
};

/// A backup-controller flow left the numerical sanity region (norm > 1e6).
class DivergedFlow : public Error {
public:
    using Error::Error;
};

/// An integrator step produced a non-finite state.
class DivergedState : public Error {
public:
    using Error::Error;
};

/// Malformed argument outside the documented contract (shape mismatch, r = 0, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A distance-based barrier was evaluated at (or within 1e-9 of) its center,
/// where the gradient is undefined.
class SingularBarrierPoint : public Error {
public:
    using Error::Error;
};

/// Config syntax error; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Scenario name not in the registry; message lists the registered names.
class UnknownScenario : public Error {
public:
    using Error::Error;
};

}  // namespace safectl
