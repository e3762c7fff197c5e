#include "tnss/cost_model.hpp"

#include <cmath>

#include "tnss/error.hpp"

namespace tnss {

CostBreakdown cost_model(double n, double ell, double gamma, double m) {
  require(n >= 1 && ell >= 1 && gamma >= 1 && m >= 1, ErrorKind::kInvalidArgument, "cost model inputs must be >= 1");
  CostBreakdown c{n, ell, gamma, m};
  const double lg = std::log10(n);
  const double m4 = std::pow(m, 4);
  c.t1 = std::pow(n, 7) * ell * lg * lg * lg;
  c.t2 = std::pow(n, 4) * ell * m4 + n * n * std::pow(ell, gamma + 1) * m4;
  c.t3 = std::pow(n, 4) * ell + std::pow(n, 3) * std::pow(ell, gamma + 1) + n * n * std::pow(ell, gamma + 2);
  c.t = c.t1 + c.t2;
  return c;
}

double scaling_rho(double ell, double n, double gamma, const ScalingParams& sp) {
  require(ell > 0 && n > 0 && gamma >= 0, ErrorKind::kInvalidArgument, "scaling law needs positive ell and n");
  const double ell_eff = ell / std::pow(n, 1.0 / sp.omega);
  return sp.c1 * std::pow(ell, gamma) * std::exp(-sp.c2 * std::pow(ell_eff, sp.mu));
}

double qubits_needed(double ell, double rho, double gamma, const ScalingParams& sp) {
  require(ell > 0 && rho > 0 && gamma >= 0, ErrorKind::kInvalidArgument, "qubit estimate needs positive ell and rho");
  const double den = std::log(sp.c1) - std::log(rho) + gamma * std::log(ell);
  if (!(den > 0.0)) raise(ErrorKind::kDomain, "target sr-pair rate unreachable at this gamma");
  return std::pow(sp.c2 * std::pow(ell, sp.mu) / den, sp.omega / sp.mu);
}

double default_bond_dim(double n) { return 6.6 * std::pow(n, 0.42); }

}  // namespace tnss
