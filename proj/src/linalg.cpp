#include "focusfl/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace focusfl {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Vector mean_of(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("mean_of: empty input");
  // Average the offsets from the first vector: identical inputs come back exactly.
  const Vector& pivot = vectors.front();
  Vector offset(pivot.size(), 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < offset.size(); ++i) offset[i] += v[i] - pivot[i];
  }
  Vector out = pivot;
  axpy(1.0 / static_cast<double>(vectors.size()), offset, out);
  return out;
}

}  // namespace focusfl
