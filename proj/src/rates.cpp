#include "qkd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qkd/hashball.hpp"

namespace qkd {

namespace {

constexpr double kLog2_3 = 1.5849625007211562;  // log2(3)

double log2_inv(double eps) { return -std::log2(eps); }

}  // namespace

std::string to_string(Rounding r) {
  switch (r) {
    case Rounding::floor_r: return "floor";
    case Rounding::ceil_r: return "ceil";
    case Rounding::rate_direct: return "direct";
  }
  return "?";
}

Rounding rounding_from_string(const std::string& s) {
  if (s == "floor") return Rounding::floor_r;
  if (s == "ceil") return Rounding::ceil_r;
  if (s == "direct") return Rounding::rate_direct;
  throw std::invalid_argument("unknown rounding mode: " + s);
}

TuhReport tuh_report(const TuhQuery& q) {
  if (q.n < 1) throw std::invalid_argument("tuh_report: n >= 1 required");
  if (!(q.delta >= 0.0 && q.delta < 0.5))
    throw std::domain_error("tuh_report: delta must lie in [0, 1/2)");
  if (!(q.epsilon > 0.0 && q.epsilon <= 1.0))
    throw std::domain_error("tuh_report: epsilon must lie in (0, 1]");

  TuhReport rep;
  rep.n = q.n;
  rep.delta = q.delta;
  rep.epsilon = q.epsilon;
  rep.rounding = q.rounding;

  double nd = static_cast<double>(q.n);
  switch (q.rounding) {
    case Rounding::floor_r:
      rep.r = static_cast<std::size_t>(std::floor(nd * q.delta));
      rep.h_arg = binary_entropy(static_cast<double>(rep.r) / nd);
      break;
    case Rounding::ceil_r:
      rep.r = static_cast<std::size_t>(std::ceil(nd * q.delta));
      rep.h_arg = binary_entropy(static_cast<double>(rep.r) / nd);
      break;
    case Rounding::rate_direct:
      rep.r = static_cast<std::size_t>(std::llround(nd * q.delta));
      rep.h_arg = binary_entropy(q.delta);
      break;
  }

  double k_real = nd * rep.h_arg + 2.0 * log2_inv(q.epsilon) + 5.0;
  rep.k = static_cast<std::size_t>(std::ceil(k_real));
  rep.output_size = static_cast<std::int64_t>(q.n) - 2 * static_cast<std::int64_t>(rep.k);
  rep.rate = static_cast<double>(rep.output_size) / nd;
  rep.security_achieved =
      std::exp2(-0.5 * static_cast<double>(rep.k) + 0.5 * nd * rep.h_arg + 2.5);
  rep.deviation = (1.0 - 2.0 * binary_entropy(q.delta)) - rep.rate;
  rep.margin_ok = 2.0 * nd * rep.h_arg < 2.0 * static_cast<double>(rep.k);
  rep.feasible = rep.output_size >= 1 && rep.margin_ok &&
                 2 * rep.k < q.n;
  return rep;
}

std::size_t min_blocksize(double delta, double epsilon, std::size_t target_bits,
                          Rounding rounding) {
  if (target_bits < 1) throw std::invalid_argument("min_blocksize: target_bits >= 1");
  double asym = 1.0 - 2.0 * binary_entropy(delta);
  if (asym <= 0.0)
    throw std::domain_error("min_blocksize: 1 - 2h(delta) <= 0, no block size suffices");
  // the deviation sandwich guarantees feasibility once
  // n asym - (4 log2(1/eps) + 12) >= target, so the scan terminates
  double ub = (static_cast<double>(target_bits) + 4.0 * log2_inv(epsilon) + 12.0) / asym;
  std::size_t n_max = static_cast<std::size_t>(std::ceil(ub)) + 8;
  for (std::size_t n = target_bits; n <= n_max; ++n) {
    TuhReport rep = tuh_report({n, delta, epsilon, rounding});
    if (rep.output_size >= static_cast<std::int64_t>(target_bits)) return n;
  }
  throw std::logic_error("min_blocksize: scan bound exceeded");
}

SamplingEpsilons sampling_epsilons(std::size_t n, std::size_t n_pe, double delta,
                                   double nu, double xi, double eps_ec,
                                   double n_out) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::domain_error("delta outside (0, 1/2)");
  if (!(0.0 < xi && xi < nu && nu < 0.5 - delta))
    throw std::domain_error("need 0 < xi < nu < 1/2 - delta");
  if (n_pe < 1 || n_pe >= n) throw std::domain_error("need 1 <= n_pe < n");
  if (!(eps_ec > 0.0)) throw std::domain_error("eps_ec must be positive");

  double nd = static_cast<double>(n);
  double n_rk = nd - static_cast<double>(n_pe);
  double coef = 1.0 - binary_entropy(delta + nu) - binary_entropy(delta);

  SamplingEpsilons out;
  out.eps_pa = 0.5 / std::sqrt(eps_ec) * std::exp2(0.5 * (-n_rk * coef + n_out));
  double a = std::exp(-2.0 * nd * static_cast<double>(n_pe) * xi * xi / (n_rk + 1.0));
  double b = std::exp(-2.0 * (nd + 2.0) * (n_rk * n_rk * (nu - xi) * (nu - xi) - 1.0) /
                      ((nd * (delta + xi) + 1.0) * (nd * (1.0 - delta - xi) + 1.0)));
  out.eps_pe = 2.0 * std::sqrt(a + b);
  out.eps_qkd = eps_ec + out.eps_pa + out.eps_pe;
  return out;
}

namespace {

// eps_pe(nu, xi) only, for the optimizer's inner loop
double eps_pe_only(double nd, double n_pe, double delta, double nu, double xi) {
  double n_rk = nd - n_pe;
  double a = std::exp(-2.0 * nd * n_pe * xi * xi / (n_rk + 1.0));
  double b = std::exp(-2.0 * (nd + 2.0) * (n_rk * n_rk * (nu - xi) * (nu - xi) - 1.0) /
                      ((nd * (delta + xi) + 1.0) * (nd * (1.0 - delta - xi) + 1.0)));
  return 2.0 * std::sqrt(a + b);
}

// Largest real n_out allowed at (n_pe, nu, xi): the minimum of
// eps_ec + eps_pa over eps_ec equals (3/2^{4/3}) 2^{E/3} with
// E = -n_rk coef + n_out, so the budget B = eps_qkd - eps_pe caps
// n_out at n_rk coef + 3 log2(B) + 4 - 3 log2(3).
double n_out_cap(double nd, double n_pe, double delta, double eps_qkd, double nu,
                 double xi) {
  if (!(xi > 0.0 && xi < nu)) return -std::numeric_limits<double>::infinity();
  double budget = eps_qkd - eps_pe_only(nd, n_pe, delta, nu, xi);
  if (budget <= 0.0) return -std::numeric_limits<double>::infinity();
  double n_rk = nd - n_pe;
  double coef = 1.0 - binary_entropy(delta + nu) - binary_entropy(delta);
  return n_rk * coef + 3.0 * std::log2(budget) + 4.0 - 3.0 * kLog2_3;
}

double golden_max(double lo, double hi, std::size_t iters,
                  const std::function<double(double)>& f, double* arg) {
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (std::size_t i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  *arg = f1 >= f2 ? x1 : x2;
  return std::max(f1, f2);
}

struct InnerBest {
  double value = -std::numeric_limits<double>::infinity();
  double nu = 0.0, xi = 0.0;
};

// maximize n_out_cap over nu and xi at fixed n_pe
InnerBest best_over_nu_xi(double nd, double n_pe, double delta, double eps_qkd,
                          std::size_t nu_grid, std::size_t refine_iters) {
  double nu_max = 0.5 - delta;
  auto cap_at_nu = [&](double nu, double* xi_arg) {
    // coarse xi = c nu, then golden refinement
    double best = -std::numeric_limits<double>::infinity();
    double best_c = 0.5;
    for (int ci = 1; ci <= 9; ++ci) {
      double c = 0.1 * ci;
      double v = n_out_cap(nd, n_pe, delta, eps_qkd, nu, c * nu);
      if (v > best) {
        best = v;
        best_c = c;
      }
    }
    double lo = std::max(0.02, best_c - 0.1) * nu;
    double hi = std::min(0.98, best_c + 0.1) * nu;
    double xi;
    double v = golden_max(lo, hi, refine_iters,
                          [&](double x) { return n_out_cap(nd, n_pe, delta, eps_qkd, nu, x); },
                          &xi);
    if (v >= best) {
      *xi_arg = xi;
      return v;
    }
    *xi_arg = best_c * nu;
    return best;
  };

  InnerBest best;
  for (std::size_t i = 1; i < nu_grid; ++i) {
    double nu = nu_max * static_cast<double>(i) / static_cast<double>(nu_grid);
    double xi;
    double v = cap_at_nu(nu, &xi);
    if (v > best.value) best = {v, nu, xi};
  }
  // refine nu around the best grid point
  double step = nu_max / static_cast<double>(nu_grid);
  double lo = std::max(step * 0.01, best.nu - step);
  double hi = std::min(nu_max * 0.999999, best.nu + step);
  double nu_ref;
  double xi_tmp = best.xi;
  double v = golden_max(lo, hi, refine_iters,
                        [&](double nu) {
                          double xi;
                          return cap_at_nu(nu, &xi);
                        },
                        &nu_ref);
  if (v > best.value) {
    double xi;
    double vv = cap_at_nu(nu_ref, &xi);
    best = {vv, nu_ref, xi};
  } else {
    best.xi = xi_tmp;
  }
  return best;
}

}  // namespace

SamplingReport sampling_optimize(const SamplingQuery& q) {
  if (!(q.delta > 0.0 && q.delta < 0.5))
    throw std::domain_error("sampling_optimize: delta outside (0, 1/2)");
  if (!(q.eps_qkd > 0.0 && q.eps_qkd < 1.0))
    throw std::domain_error("sampling_optimize: eps_qkd outside (0, 1)");
  if (q.n < 4) throw std::invalid_argument("sampling_optimize: n too small");

  double nd = static_cast<double>(q.n);
  double best_val = -std::numeric_limits<double>::infinity();
  std::size_t best_npe = 0;
  InnerBest best_inner;

  std::size_t stride = std::max<std::size_t>(1, q.n / q.n_pe_grid);
  auto consider = [&](std::size_t n_pe) {
    if (n_pe < 1 || n_pe >= q.n) return;
    InnerBest ib = best_over_nu_xi(nd, static_cast<double>(n_pe), q.delta, q.eps_qkd,
                                   q.nu_grid, q.refine_iters);
    // tie-break: larger value, then smaller n_pe, then smaller nu
    if (ib.value > best_val ||
        (ib.value == best_val &&
         (n_pe < best_npe || (n_pe == best_npe && ib.nu < best_inner.nu)))) {
      best_val = ib.value;
      best_npe = n_pe;
      best_inner = ib;
    }
  };

  for (std::size_t n_pe = stride; n_pe < q.n; n_pe += stride) consider(n_pe);
  // fine scan around the coarse winner
  if (best_npe > 0 && stride > 1) {
    std::size_t lo = best_npe > stride ? best_npe - stride : 1;
    std::size_t hi = std::min(q.n - 1, best_npe + stride);
    std::size_t fine = std::max<std::size_t>(1, stride / 64);
    for (std::size_t n_pe = lo; n_pe <= hi; n_pe += fine) consider(n_pe);
  }

  SamplingReport rep;
  rep.n_pe = best_npe;
  if (!(best_val >= 1.0)) {
    rep.feasible = false;
    rep.n_out = 0;
    return rep;
  }

  std::int64_t n_out = static_cast<std::int64_t>(std::floor(best_val));
  double n_rk = nd - static_cast<double>(best_npe);
  double coef = 1.0 - binary_entropy(q.delta + best_inner.nu) - binary_entropy(q.delta);

  // witness: eps_ec at the stationary point of eps_ec + eps_pa, then back
  // off n_out if floating point pushed the total over budget
  for (; n_out >= 1; --n_out) {
    double e_exp = -n_rk * coef + static_cast<double>(n_out);
    double eps_ec = std::exp2(-4.0 / 3.0 + e_exp / 3.0);
    SamplingEpsilons eps = sampling_epsilons(q.n, best_npe, q.delta, best_inner.nu,
                                             best_inner.xi, eps_ec,
                                             static_cast<double>(n_out));
    if (eps.eps_qkd <= q.eps_qkd) {
      rep.feasible = true;
      rep.n_out = n_out;
      rep.n_rk = q.n - best_npe;
      rep.nu = best_inner.nu;
      rep.xi = best_inner.xi;
      rep.eps_ec = eps_ec;
      rep.eps_pa = eps.eps_pa;
      rep.eps_pe = eps.eps_pe;
      rep.eps_qkd_achieved = eps.eps_qkd;
      rep.leakage = n_rk * binary_entropy(q.delta) - std::log2(eps_ec);
      rep.rate = static_cast<double>(n_out) / nd;
      return rep;
    }
  }
  rep.feasible = false;
  rep.n_out = 0;
  return rep;
}

BoundReport sampling_upper_bound(std::size_t n, double delta, double eps_qkd) {
  if (!(delta > 0.0 && delta < 0.5))
    throw std::domain_error("sampling_upper_bound: delta outside (0, 1/2)");
  double asym = 1.0 - 2.0 * binary_entropy(delta);
  if (asym <= 0.0) throw std::domain_error("sampling_upper_bound: 1 - 2h(delta) <= 0");
  if (!(eps_qkd > 0.0 && eps_qkd <= 1.0))
    throw std::domain_error("sampling_upper_bound: eps_qkd outside (0, 1]");

  BoundReport rep;
  double hd = binary_entropy(delta);
  rep.c1 = 3.0 / std::pow(2.0, 5.0 / 3.0) * std::cbrt(asym) *
           std::pow((1.0 - hd) / (0.5 - delta), 2.0 / 3.0) *
           std::cbrt(std::log(2.0 / eps_qkd));
  rep.c2 = 3.0 * std::log2(1.0 / eps_qkd) + 3.0 * kLog2_3 - 4.0;
  double nd = static_cast<double>(n);
  rep.bound_rate = std::max(asym / 2.0, asym - rep.c1 / std::cbrt(nd) - rep.c2 / nd);
  return rep;
}

std::vector<CurveRow> compare_curves(double delta, double epsilon,
                                     const std::vector<std::size_t>& n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("compare_curves: empty grid");
  std::vector<CurveRow> rows;
  rows.reserve(n_grid.size());
  for (std::size_t n : n_grid) {
    CurveRow row;
    row.n = n;
    row.delta = delta;
    row.epsilon = epsilon;
    TuhReport tuh = tuh_report({n, delta, epsilon, Rounding::rate_direct});
    row.tuh_k = tuh.k;
    row.tuh_out = tuh.output_size;
    row.tuh_rate = tuh.rate;
    SamplingReport samp = sampling_optimize({n, delta, epsilon});
    row.samp_out = samp.n_out;
    row.samp_rate = samp.rate;
    row.bound_rate = sampling_upper_bound(n, delta, epsilon).bound_rate;
    rows.push_back(row);
  }
  return rows;
}

std::string curves_csv_header() {
  return "n,delta,epsilon,tuh_k,tuh_out,tuh_rate,samp_out,samp_rate,bound_rate";
}

std::string to_csv(const CurveRow& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.n << ',' << r.delta << ',' << r.epsilon << ',' << r.tuh_k << ','
     << r.tuh_out << ',' << r.tuh_rate << ',' << r.samp_out << ',' << r.samp_rate
     << ',' << r.bound_rate;
  return os.str();
}

}  // namespace qkd
