#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sck/data_model.hpp"
#include "sck/rng.hpp"

namespace sck::testing {

inline ObservationTable table_of(const std::vector<int>& z, const std::vector<int>& d,
                                 const std::vector<double>& y,
                                 const std::vector<std::vector<double>>& x_cols = {},
                                 bool y_binary = true) {
  ObservationTable::Columns c;
  const auto n = static_cast<Index>(z.size());
  c.z.resize(n);
  c.d.resize(n);
  c.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    c.z[i] = z[i];
    c.d[i] = d[i];
    c.y[i] = y[i];
  }
  c.x.resize(n, static_cast<Index>(x_cols.size()));
  for (std::size_t j = 0; j < x_cols.size(); ++j) {
    c.covariate_names.push_back("x" + std::to_string(j + 1));
    for (Index i = 0; i < n; ++i) c.x(i, static_cast<Index>(j)) = x_cols[j][i];
  }
  c.y_binary = y_binary;
  return ObservationTable::create(std::move(c));
}

// Random binary table with an instrument that moves d and y, plus two
// covariates (one continuous, one discrete). Rows 0 and 1 fix both arms.
inline ObservationTable random_table(std::uint64_t seed, Index n) {
  StreamRng rng(seed, 0);
  const double tau = 0.2 + 0.6 * rng.uniform();
  const double pd0 = 0.4 * rng.uniform(), pd1 = 0.5 + 0.5 * rng.uniform();
  const double py[2][2] = {{0.2 + 0.3 * rng.uniform(), 0.3 + 0.4 * rng.uniform()},
                           {0.1 + 0.3 * rng.uniform(), 0.4 + 0.5 * rng.uniform()}};
  ObservationTable::Columns c;
  c.z.resize(n);
  c.d.resize(n);
  c.y.resize(n);
  c.x.resize(n, 2);
  c.covariate_names = {"age", "group"};
  for (Index i = 0; i < n; ++i) {
    const int z = i == 0 ? 0 : (i == 1 ? 1 : rng.uniform() < tau);
    const int d = rng.uniform() < (z ? pd1 : pd0);
    const int y = rng.uniform() < py[z][d];
    c.z[i] = z;
    c.d[i] = d;
    c.y[i] = y;
    c.x(i, 0) = 20.0 + 40.0 * rng.uniform() + 5.0 * y * d;
    c.x(i, 1) = static_cast<double>(rng.below(4));
  }
  return ObservationTable::create(std::move(c));
}

// Plain-loop arm means, independent of the library's regression code.
inline double arm_mean(const VectorXd& v, const VectorXd& z, int arm) {
  double s = 0.0;
  int n = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (static_cast<int>(z[i]) == arm) {
      s += v[i];
      ++n;
    }
  return s / n;
}

inline double arm_diff(const VectorXd& v, const VectorXd& z) {
  return arm_mean(v, z, 1) - arm_mean(v, z, 0);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace sck::testing
