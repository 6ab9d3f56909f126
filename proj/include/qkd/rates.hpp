#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qkd {

/// How the tolerated error count r is derived from the error rate delta.
enum class Rounding { floor_r, ceil_r, rate_direct };

std::string to_string(Rounding r);
Rounding rounding_from_string(const std::string& s);

struct TuhQuery {
  std::size_t n = 0;
  double delta = 0.0;    // in (0, 1/2)
  double epsilon = 0.0;  // in (0, 1)
  Rounding rounding = Rounding::floor_r;
};

struct TuhReport {
  std::size_t n = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  Rounding rounding = Rounding::floor_r;
  std::size_t r = 0;        // tolerated errors (floor/ceil modes)
  double h_arg = 0.0;       // the entropy argument actually used for k
  std::size_t k = 0;        // syndrome size per hash test
  std::int64_t output_size = 0;  // n - 2k, may be <= 0
  double rate = 0.0;             // output_size / n
  double security_achieved = 0.0;  // 2^{-k/2 + n h/2 + 5/2}
  double deviation = 0.0;          // (1 - 2h(delta)) - rate
  bool feasible = false;           // output_size >= 1 and 2nh < 2k < n
  bool margin_ok = false;          // 2 n h < 2 k (the security-claim margin)
};

TuhReport tuh_report(const TuhQuery& q);

/// Smallest n whose report has output_size >= target_bits. Throws when
/// 1 - 2h(delta) <= 0 (no block size can reach a positive rate).
std::size_t min_blocksize(double delta, double epsilon, std::size_t target_bits,
                          Rounding rounding);

struct SamplingEpsilons {
  double eps_pa = 0.0;
  double eps_pe = 0.0;
  double eps_qkd = 0.0;  // eps_ec + eps_pa + eps_pe
};

/// The epsilon budget of the random-sampling protocol at one parameter
/// point. Requires 0 < xi < nu < 1/2 - delta, 1 <= n_pe < n, eps_ec > 0.
SamplingEpsilons sampling_epsilons(std::size_t n, std::size_t n_pe, double delta,
                                   double nu, double xi, double eps_ec,
                                   double n_out);

struct SamplingQuery {
  std::size_t n = 0;
  double delta = 0.0;
  double eps_qkd = 0.0;
  // search controls
  std::size_t nu_grid = 200;
  std::size_t n_pe_grid = 200;
  std::size_t refine_iters = 60;
};

struct SamplingReport {
  bool feasible = false;
  std::int64_t n_out = 0;
  std::size_t n_pe = 0;
  std::size_t n_rk = 0;
  double nu = 0.0;
  double xi = 0.0;
  double eps_ec = 0.0;
  double eps_pa = 0.0;
  double eps_pe = 0.0;
  double eps_qkd_achieved = 0.0;
  double leakage = 0.0;  // n_rk h(delta) - log2(eps_ec)
  double rate = 0.0;
};

/// Maximizes the integer output size subject to
/// eps_ec + eps_pa(nu) + eps_pe(nu, xi) <= eps_qkd. Deterministic grid
/// search with golden-section refinement; eps_ec sits at the closed-form
/// stationary point of eps_ec + eps_pa.
SamplingReport sampling_optimize(const SamplingQuery& q);

struct BoundReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double bound_rate = 0.0;
};

/// Closed-form upper bound on the random-sampling key rate.
BoundReport sampling_upper_bound(std::size_t n, double delta, double eps_qkd);

struct CurveRow {
  std::size_t n = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::size_t tuh_k = 0;
  std::int64_t tuh_out = 0;
  double tuh_rate = 0.0;
  std::int64_t samp_out = 0;
  double samp_rate = 0.0;
  double bound_rate = 0.0;
};

/// One row per grid point; the two-universal column uses rate_direct
/// rounding (the mode under which the deviation sandwich is exact).
std::vector<CurveRow> compare_curves(double delta, double epsilon,
                                     const std::vector<std::size_t>& n_grid);

std::string curves_csv_header();
std::string to_csv(const CurveRow& row);

}  // namespace qkd
