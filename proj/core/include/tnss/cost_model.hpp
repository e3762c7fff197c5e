#pragma once

namespace tnss {

/// Fitted constants of the sr-pair scaling law rho = C1 ell^gamma
/// exp(-C2 (ell / n^(1/omega))^mu).
struct ScalingParams {
  double c1 = 1.0;
  double c2 = 0.013;
  double mu = 1.61;
  double omega = 9.3;
};

/// Operation counts with every big-O constant set to 1; only ratios and
/// crossovers carry meaning.
struct CostBreakdown {
  double n = 0.0;
  double ell = 0.0;
  double gamma = 0.0;
  double m = 0.0;
  double t1 = 0.0;  // Babai: n^7 ell (log10 n)^3
  double t2 = 0.0;  // TTN: n^4 ell m^4 + n^2 ell^(gamma+1) m^4
  double t3 = 0.0;  // smoothness tests: n^4 ell + n^3 ell^(gamma+1) + n^2 ell^(gamma+2)
  double t = 0.0;   // t1 + t2
};

CostBreakdown cost_model(double n, double ell, double gamma, double m);

double scaling_rho(double ell, double n, double gamma, const ScalingParams& sp = {});

/// Inverse of scaling_rho in n, natural logarithms:
/// [C2 ell^mu / (ln C1 - ln rho + gamma ln ell)]^(omega/mu).
/// Throws kDomain when the denominator is not positive.
double qubits_needed(double ell, double rho, double gamma, const ScalingParams& sp = {});

/// Bond dimension law m(n) = 6.6 n^0.42.
double default_bond_dim(double n);

}  // namespace tnss
