#include "prox/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace prox {

double rho_bound(double eps, double s) {
  if (!(eps > 0.0))
    throw std::invalid_argument("rho_bound: eps must be > 0");
  if (s == 1.0)
    return 1.0 / (1.0 + std::min(eps * eps, std::sqrt(eps)) / 4.0);
  if (s == 2.0) return 1.0 / (1.0 + eps * eps / (1.0 + eps));
  throw std::invalid_argument("rho_bound: s must be 1 or 2");
}

SweepRow sweep_row(double eps, double s, bool lifted,
                   std::optional<double> w) {
  if (s != 1.0 && s != 2.0)
    throw std::invalid_argument("sweep_row: s must be 1 or 2");
  HashSpec spec;
  spec.s = s;
  spec.w = w;
  // n only sizes k and L, which a sweep row does not carry.
  const LshParams params = derive_params(2, eps, spec, lifted);
  SweepRow row;
  row.eps = eps;
  row.w = spec.effective_w(eps);
  row.s = s;
  row.lifted = lifted;
  row.p0 = params.p0;
  row.p1 = params.p1;
  row.p2 = params.p2;
  row.rho = params.rho;
  row.alpha = params.alpha;
  row.bound_rho = rho_bound(eps, s);
  row.bound_ok = row.rho <= row.bound_rho;
  return row;
}

std::vector<SweepRow> sweep_grid(double lo, double hi, std::size_t steps,
                                 double s, bool lifted) {
  if (!(lo > 0.0) || !(hi >= lo))
    throw std::invalid_argument("sweep_grid: need 0 < lo <= hi");
  if (steps == 0) throw std::invalid_argument("sweep_grid: steps must be > 0");
  std::vector<SweepRow> rows;
  rows.reserve(steps);
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (std::size_t i = 0; i < steps; ++i) {
    double eps = lo;
    if (steps > 1) {
      if (i == steps - 1)
        eps = hi; // endpoints exact, no drift from the exponent arithmetic
      else if (i > 0)
        eps = std::pow(10.0, llo + (lhi - llo) * double(i) / double(steps - 1));
    }
    rows.push_back(sweep_row(eps, s, lifted));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "eps,w,s,lifted,p0,p1,p2,rho,alpha,bound_rho,bound_ok\n";
  char buf[352];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%d\n",
                  r.eps, r.w, r.s, r.lifted ? 1 : 0, r.p0, r.p1, r.p2, r.rho,
                  r.alpha, r.bound_rho, r.bound_ok ? 1 : 0);
    out += buf;
  }
  return out;
}

} // namespace prox
