#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace qkd {

/// Upper tail probability of a chi-squared variable with `df` degrees
/// of freedom.
inline double chi_squared_pvalue(double stat, double df) {
  if (df <= 0.0) throw std::domain_error("chi_squared_pvalue: df > 0 required");
  if (stat <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Pearson statistic of observed counts against expected counts.
inline double chi_squared_stat(const std::vector<double>& observed,
                               const std::vector<double>& expected) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi_squared_stat: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  return s;
}

/// Total variation distance (1/2) sum |p_i - q_i|.
inline double total_variation(const std::vector<double>& p,
                              const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace qkd
