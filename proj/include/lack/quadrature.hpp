#pragma once

#include <functional>

namespace lack::quadrature {

struct Tolerance {
  double absolute = 1e-9;
  double relative = 1e-12;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;  // Kronrod-vs-Gauss estimate, summed over intervals
  int intervals = 0;
};

using Integrand = std::function<double(double)>;

// Globally adaptive 7/15-point Gauss-Kronrod on [lo, hi].
Result integrate(const Integrand& f, double lo, double hi, Tolerance tol = {});

// Same on [lo, +inf) through x = lo + scale * s / (1 - s). f must decay to
// zero; scale should be of the order of the decay length.
Result integrate_to_infinity(const Integrand& f, double lo, double scale = 1.0,
                             Tolerance tol = {});

}  // namespace lack::quadrature
