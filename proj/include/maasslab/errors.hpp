#pragma once

#include <stdexcept>
#include <string>

namespace maass {

// Base class for all errors raised by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation at a pole of Gamma (or of zeta at s=1).
struct pole_error : error {
    using error::error;
};

// Adaptive quadrature could not reach the requested tolerance within its
// subdivision budget.
struct quadrature_error : error {
    using error::error;
};

// A coefficient was requested for an index with a prime factor beyond the
// form's p_cap.
struct coefficient_cap_error : error {
    using error::error;
};

// Operation requires Re(s) in a half-plane it was not given.
struct half_plane_error : error {
    using error::error;
};

// |lambda(p)| exceeded the Hecke operator norm n(p).
struct bound_violation_error : error {
    using error::error;
};

// Divergent tail series (precondition 4 q^{-(1/2+theta)} < 1 failed).
struct divergence_error : error {
    using error::error;
};

// A size/iteration budget was exhausted (P(X) overflow, AFE ladder, ...).
struct budget_error : error {
    using error::error;
};

// A record failed the ingestion invariants.
struct validation_error : error {
    using error::error;
};

// A form lacks eigenvalue data for a prime the operation needs.
struct missing_coordinate_error : error {
    using error::error;
};

// Form is outside the box event B_R required by the operation.
struct membership_error : error {
    using error::error;
};

// Dataset / payload could not be parsed.
struct parse_error : error {
    using error::error;
};

// Upstream payload did not have the expected shape.
struct schema_drift_error : error {
    using error::error;
};

// HTTP transport failure after retries.
struct network_error : error {
    using error::error;
};

}  // namespace maass
