#pragma once

#include <stdexcept>
#include <string>

namespace pwsopt {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value.
struct NumericalError : Error {
  using Error::Error;
};

/// Both fields point away from the guard surface at a surface point
/// (L_{f1}g <= 0 and L_{f2}g >= 0), so the Filippov solution is not unique.
struct TransversalityViolation : Error {
  using Error::Error;
};

/// The sliding coefficient is undefined: |grad g . (f1 - f2)| below tolerance.
struct DegenerateSliding : Error {
  using Error::Error;
};

/// The event count exceeded the configured cap.
struct ZenoSuspected : Error {
  using Error::Error;
};

/// All measured errors in a rate study sit at machine noise; no rate to fit.
struct InsufficientDecay : Error {
  using Error::Error;
};

/// A derivative study was requested at data that fails the
/// differentiability audit.
struct AuditFailed : Error {
  using Error::Error;
};

/// The requested snapshot time does not land on the integration grid.
struct TaskInfeasibleGrid : Error {
  using Error::Error;
};

/// Malformed or inconsistent configuration input.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pwsopt
