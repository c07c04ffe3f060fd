#pragma once

#include <stdexcept>
#include <string>

namespace hall {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad geometry or parameters supplied by the caller.
struct ConfigError : Error { using Error::Error; };
// A dimension cap (basis size, dense eigendecomposition) was exceeded.
struct CapacityError : Error { using Error::Error; };
// Operators living on different sectors were combined.
struct BasisMismatch : Error { using Error::Error; };
// An edge list that does not chain into a path.
struct MalformedPath : Error { using Error::Error; };
// A potential was requested for a one-form with nonzero circulation.
struct InexactFormError : Error { using Error::Error; };
// Spectral-gap assumption violated (degenerate or near-degenerate ground state).
struct AssumptionViolation : Error { using Error::Error; };
// Eigensolver or propagator did not converge.
struct SolverError : Error { using Error::Error; };
// Operation requires a full eigendecomposition but only a ground-state cache exists.
struct CapabilityError : Error { using Error::Error; };
// Kubo frequency outside the admissible half-gap window.
struct FrequencyOutOfGap : Error { using Error::Error; };
// Bloch band touches its neighbour; band Chern number undefined.
struct BandTouching : Error { using Error::Error; };

}  // namespace hall
