#pragma once

#include "prox/stable_hash.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace prox {

/// One point of the parameter landscape: the collision probabilities and
/// exponents the hash family yields at a given approximation factor, next
/// to the closed-form cap the exponent is expected to stay under.
struct SweepRow {
  double eps = 0.0;
  double w = 0.0;
  double s = 0.0;
  bool lifted = true;
  double p0 = 0.0; ///< collision probability at distance 1/(1+eps)
  double p1 = 0.0; ///< collision probability at distance 1
  double p2 = 0.0; ///< collision probability at the far lifted distance
  double rho = 0.0;
  double alpha = 0.0;
  double bound_rho = 0.0; ///< closed-form cap on rho at this eps and s
  bool bound_ok = false;  ///< rho <= bound_rho
};

/// Closed-form cap on the lifted collision exponent:
/// 1/(1 + min{eps^2, sqrt(eps)}/4) for s = 1 and
/// 1/(1 + eps^2/(1+eps)) for s = 2. Only those two orders have a cap.
double rho_bound(double eps, double s);

/// Evaluates one grid point. The bucket width defaults to max{1, eps}
/// when not given. s must be 1 or 2.
SweepRow sweep_row(double eps, double s, bool lifted = true,
                   std::optional<double> w = std::nullopt);

/// Log10-spaced grid over [lo, hi] with `steps` points (endpoints exact).
std::vector<SweepRow> sweep_grid(double lo, double hi, std::size_t steps,
                                 double s, bool lifted = true);

/// Renders rows as CSV with a fixed header; doubles keep full precision.
std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace prox
