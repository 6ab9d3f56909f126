#include "qkd/pauli.hpp"

#include <bit>
#include <cmath>

namespace qkd {

namespace {

constexpr double kTol = 1e-9;

// coordinate i of s becomes bit (n-1-i) of the amplitude index
std::uint64_t rev_index(const BitVector& s) {
  std::uint64_t out = 0;
  std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    if (s.get(i)) out |= std::uint64_t{1} << (n - 1 - i);
  return out;
}

std::uint64_t rev_index_raw(std::uint64_t v, std::size_t n) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < n; ++i)
    if ((v >> i) & 1) out |= std::uint64_t{1} << (n - 1 - i);
  return out;
}

bool parity(std::uint64_t v) { return std::popcount(v) & 1; }

// sigma1^u sigma3^v in index space: |i> -> (-1)^{popcount(v & i)} |i ^ u>
struct MaskedGen {
  std::uint64_t u = 0;
  std::uint64_t v = 0;
};

Eigen::VectorXcd apply_gen(const MaskedGen& g, const Eigen::VectorXcd& in) {
  Eigen::VectorXcd out(in.size());
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    std::uint64_t idx = static_cast<std::uint64_t>(i);
    double ph = parity(g.v & idx) ? -1.0 : 1.0;
    out[static_cast<Eigen::Index>(idx ^ g.u)] = ph * in[i];
  }
  return out;
}

// (I + s g)/2 applied in place
void apply_half_projector(const MaskedGen& g, double sign, Eigen::VectorXcd& psi) {
  psi = 0.5 * (psi + sign * apply_gen(g, psi));
}

std::vector<MaskedGen> masked_gens(const PauliTuple& t, std::size_t shift) {
  std::vector<MaskedGen> gens(t.m());
  for (std::size_t j = 0; j < t.m(); ++j) {
    gens[j].u = rev_index(t.xpart().row(j)) << shift;
    gens[j].v = rev_index(t.zpart().row(j)) << shift;
  }
  return gens;
}

// Sequential binary sampling with a single uniform draw: descend the
// outcome tree with bit 0 most significant, 0-branch first, which is
// exactly inversion of the cumulative distribution in lex order.
BitVector measure_gens(StateVec& state, const std::vector<MaskedGen>& gens,
                       Rng& rng, double* prob_out) {
  BitVector outcome(gens.size());
  double u = rng.next_double();
  double total = 1.0;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    Eigen::VectorXcd zero_branch = state.amp;
    apply_half_projector(gens[j], +1.0, zero_branch);
    double norm = state.amp.squaredNorm();
    double p0 = zero_branch.squaredNorm() / norm;
    if (u < p0) {
      state.amp = std::move(zero_branch);
      if (p0 > 0.0) u /= p0;
      total *= p0;
    } else {
      outcome.set(j, true);
      apply_half_projector(gens[j], -1.0, state.amp);
      if (p0 < 1.0) u = (u - p0) / (1.0 - p0);
      total *= 1.0 - p0;
    }
  }
  state.amp.normalize();
  if (prob_out) *prob_out = total;
  return outcome;
}

}  // namespace

PauliTuple::PauliTuple(std::size_t n, BitMatrix xpart, BitMatrix zpart)
    : n_(n), x_(std::move(xpart)), z_(std::move(zpart)) {
  if (x_.rows() != z_.rows() || x_.cols() != n_ || z_.cols() != n_)
    throw DimensionError("pauli tuple: block shapes must be m x n");
  std::size_t m = x_.rows();
  if (m > n_) throw std::invalid_argument("pauli tuple: more generators than qubits");
  // independence of the rows of [x | z]
  BitMatrix cat(m, 2 * n_);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      cat.set(i, j, x_.get(i, j));
      cat.set(i, n_ + j, z_.get(i, j));
    }
  if (cat.rank() != m)
    throw std::invalid_argument("pauli tuple: generators not independent");
  // pairwise commutation and a real (Y-free) presentation
  std::vector<std::uint64_t> xm(m), zm(m);
  for (std::size_t i = 0; i < m; ++i) {
    xm[i] = x_.row(i).to_index();
    zm[i] = z_.row(i).to_index();
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (xm[i] & zm[i])
      throw std::invalid_argument("pauli tuple: generator mixes sigma1 and sigma3 on a qubit");
    for (std::size_t j = i + 1; j < m; ++j)
      if (parity(xm[i] & zm[j]) != parity(zm[i] & xm[j]))
        throw std::invalid_argument("pauli tuple: generators do not commute");
  }
}

PauliTuple PauliTuple::z_type(const BitMatrix& rows) {
  return PauliTuple(rows.cols(), BitMatrix::zero(rows.rows(), rows.cols()), rows);
}

PauliTuple PauliTuple::x_type(const BitMatrix& rows) {
  return PauliTuple(rows.cols(), rows, BitMatrix::zero(rows.rows(), rows.cols()));
}

StateVec bell_state(const BellIndex& idx) {
  std::size_t n = idx.alpha.size();
  if (idx.beta.size() != n) throw DimensionError("bell_state: alpha/beta length mismatch");
  if (n < 1 || n > 6) throw ResourceError("bell_state: supported for 1 <= n <= 6");
  StateVec st;
  st.n_qubits = static_cast<int>(2 * n);
  st.amp = Eigen::VectorXcd::Zero(Eigen::Index(1) << (2 * n));
  std::uint64_t a = idx.alpha.to_index();
  std::uint64_t b = idx.beta.to_index();
  double scale = std::pow(2.0, -0.5 * static_cast<double>(n));
  for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z) {
    double ph = parity(b & z) ? -scale : scale;
    std::uint64_t ia = rev_index_raw(z, n);
    std::uint64_t ib = rev_index_raw(z ^ a, n);
    st.amp[static_cast<Eigen::Index>((ia << n) | ib)] = ph;
  }
  return st;
}

Eigen::MatrixXcd projector(const PauliTuple& t, const BitVector& x) {
  if (x.size() != t.m()) throw DimensionError("projector: outcome length must be m");
  if (t.n() > 12) throw ResourceError("projector: register too large");
  auto gens = masked_gens(t, 0);
  Eigen::Index dim = Eigen::Index(1) << t.n();
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t j = 0; j < gens.size(); ++j) {
    double sign = x.get(j) ? -1.0 : 1.0;
    for (Eigen::Index c = 0; c < dim; ++c) {
      Eigen::VectorXcd col = p.col(c);
      apply_half_projector(gens[j], sign, col);
      p.col(c) = col;
    }
  }
  return p;
}

MeasureResult measure_tuple(const StateVec& state, const PauliTuple& t, Rng& rng) {
  if (static_cast<std::size_t>(state.n_qubits) != t.n())
    throw DimensionError("measure_tuple: register size mismatch");
  MeasureResult res;
  res.post = state;
  auto gens = masked_gens(t, 0);
  res.outcome = measure_gens(res.post, gens, rng, &res.prob);
  return res;
}

bool check_bell_action(const PauliTuple& t, const BellIndex& idx) {
  std::size_t n = t.n();
  if (n > 5) throw ResourceError("check_bell_action: supported for n <= 5");
  if (idx.alpha.size() != n || idx.beta.size() != n)
    throw DimensionError("check_bell_action: label length mismatch");
  StateVec psi = bell_state(idx);
  std::size_t m = t.m();
  auto gens_a = masked_gens(t, n);
  auto gens_b = masked_gens(t, 0);
  // the outcome shift induced by the Bell label
  std::uint64_t a = idx.alpha.to_index();
  std::uint64_t b = idx.beta.to_index();
  BitVector shift(m);
  for (std::size_t j = 0; j < m; ++j) {
    bool s = parity(t.zpart().row(j).to_index() & a) ^
             parity(t.xpart().row(j).to_index() & b);
    shift.set(j, s);
  }
  for (std::uint64_t xi = 0; xi < (std::uint64_t{1} << m); ++xi) {
    BitVector x = BitVector::from_index(xi, m);
    StateVec ax = psi;
    for (std::size_t j = 0; j < m; ++j)
      apply_half_projector(gens_a[j], x.get(j) ? -1.0 : 1.0, ax.amp);
    for (std::uint64_t yi = 0; yi < (std::uint64_t{1} << m); ++yi) {
      BitVector y = BitVector::from_index(yi, m);
      Eigen::VectorXcd both = ax.amp;
      for (std::size_t j = 0; j < m; ++j)
        apply_half_projector(gens_b[j], y.get(j) ? -1.0 : 1.0, both);
      if ((x ^ shift) == y) {
        if ((both - ax.amp).norm() > kTol) return false;
      } else {
        if (both.norm() > kTol) return false;
      }
    }
  }
  return true;
}

OracleOutcomes oracle_protocol_run(const KeySchedule& ks, const BellIndex& idx,
                                   Rng& rng) {
  std::size_t n = ks.n;
  if (n > 4) throw ResourceError("oracle_protocol_run: supported for n <= 4");
  if (idx.alpha.size() != n || idx.beta.size() != n)
    throw DimensionError("oracle_protocol_run: label length mismatch");
  StateVec st = bell_state(idx);
  auto z_gens = [&](const BitMatrix& rows, std::size_t shift) {
    std::vector<MaskedGen> g(rows.rows());
    for (std::size_t j = 0; j < rows.rows(); ++j)
      g[j].v = rev_index(rows.row(j)) << shift;
    return g;
  };
  auto x_gens = [&](const BitMatrix& rows, std::size_t shift) {
    std::vector<MaskedGen> g(rows.rows());
    for (std::size_t j = 0; j < rows.rows(); ++j)
      g[j].u = rev_index(rows.row(j)) << shift;
    return g;
  };
  OracleOutcomes out;
  out.u_a = measure_gens(st, z_gens(ks.L1, n), rng, nullptr);
  out.u_b = measure_gens(st, z_gens(ks.L1, 0), rng, nullptr);
  out.v_a = measure_gens(st, x_gens(ks.M2, n), rng, nullptr);
  out.v_b = measure_gens(st, x_gens(ks.M2, 0), rng, nullptr);
  out.w_a = measure_gens(st, x_gens(ks.M3, n), rng, nullptr);
  out.w_b = measure_gens(st, x_gens(ks.M3, 0), rng, nullptr);
  return out;
}

}  // namespace qkd
