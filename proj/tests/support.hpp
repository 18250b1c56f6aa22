#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "focusfl/data_synth.hpp"
#include "focusfl/linalg.hpp"

namespace testkit {

using focusfl::AgentDataset;
using focusfl::Vector;

inline AgentDataset dataset(const std::vector<Vector>& rows, const Vector& labels, Vector true_mean = {},
                            bool classification = false) {
  AgentDataset d;
  d.features = focusfl::Matrix(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.features(i, j) = rows[i][j];
  }
  d.labels = labels;
  d.true_mean = true_mean.empty() ? Vector(d.dim(), 0.0) : std::move(true_mean);
  d.classification = classification;
  return d;
}

// Dense solve with partial pivoting; independent of the library's code paths.
inline Vector solve(std::vector<Vector> a, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (a[piv][c] == 0.0) throw std::runtime_error("singular system");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Least squares via the normal equations XᵀX w = Xᵀy.
inline Vector ols(const AgentDataset& d) {
  const std::size_t p = d.dim();
  std::vector<Vector> xtx(p, Vector(p, 0.0));
  Vector xty(p, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      xty[j] += d.features(i, j) * d.labels[i];
      for (std::size_t k = 0; k < p; ++k) xtx[j][k] += d.features(i, j) * d.features(i, k);
    }
  }
  return solve(xtx, xty);
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testkit
