#include "bivrec/coreg.hpp"

#include <cmath>

namespace bivrec {

double induced_correlation(double a11, double a21, double a22) {
  if (!(a11 > 0.0) || !(a22 >= 0.0)) {
    throw NumericalError("induced_correlation: diagonal entries must be positive");
  }
  const double denom = std::sqrt(a21 * a21 + a22 * a22);
  if (denom == 0.0) {
    throw NumericalError("induced_correlation: a21 = a22 = 0 is degenerate");
  }
  return a21 / denom;
}

std::pair<double, double> spatial_share(double a11, double a21, double a22) {
  const double top = a11 * a11;
  const double bottom = a21 * a21 + a22 * a22;
  return {top / (top + 1.0), bottom / (bottom + 1.0)};
}

double block_average(std::span<const double> per_cell_values) {
  if (per_cell_values.empty()) throw DataError("block_average: empty grid");
  double s = 0.0;
  for (double v : per_cell_values) s += v;
  return s / static_cast<double>(per_cell_values.size());
}

}  // namespace bivrec
