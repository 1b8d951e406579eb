#include "lack/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace lack::quadrature {
namespace {

// Kronrod abscissae on [0,1] (symmetric), odd indices are the Gauss points.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const Integrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

Result integrate(const Integrand& f, double lo, double hi, Tolerance tol) {
  if (lo == hi) return {};
  if (hi < lo) {
    Result r = integrate(f, hi, lo, tol);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Segment> work;
  Segment first = gauss_kronrod(f, lo, hi);
  double total = first.value;
  double error = first.error;
  work.push(first);
  int intervals = 1;
  while (error > std::max(tol.absolute, tol.relative * std::abs(total)) &&
         intervals < tol.max_intervals) {
    Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      // Interval cannot be split further in double precision.
      work.push({worst.lo, worst.hi, worst.value, 0.0});
      error -= worst.error;
      continue;
    }
    Segment left = gauss_kronrod(f, worst.lo, mid);
    Segment right = gauss_kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift of the incremental updates.
  double value = 0.0;
  double err = 0.0;
  while (!work.empty()) {
    value += work.top().value;
    err += work.top().error;
    work.pop();
  }
  return {value, err, intervals};
}

Result integrate_to_infinity(const Integrand& f, double lo, double scale,
                             Tolerance tol) {
  auto mapped = [&f, lo, scale](double s) {
    const double one_minus = 1.0 - s;
    if (one_minus <= 0.0) return 0.0;
    const double x = lo + scale * s / one_minus;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * scale / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, tol);
}

}  // namespace lack::quadrature
