#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qkd/bits.hpp"
#include "qkd/rng.hpp"

namespace qkd {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense statevector on a small register. Qubit 0 is the most significant
/// bit of the amplitude index.
struct StateVec {
  int n_qubits = 0;
  Eigen::VectorXcd amp;

  double norm_sq() const { return amp.squaredNorm(); }
};

/// Bell-basis label: bit-flip pattern alpha, phase-flip pattern beta.
struct BellIndex {
  BitVector alpha;
  BitVector beta;
};

/// Tuple of independent commuting self-adjoint Pauli products.
/// Generator i is sigma1^{xpart_i} sigma3^{zpart_i}; per-generator X and Z
/// supports are disjoint so every projector is real.
class PauliTuple {
 public:
  PauliTuple(std::size_t n, BitMatrix xpart, BitMatrix zpart);

  std::size_t n() const { return n_; }
  std::size_t m() const { return x_.rows(); }
  const BitMatrix& xpart() const { return x_; }
  const BitMatrix& zpart() const { return z_; }

  /// Z-type tuple: rows of `rows` as sigma3 products.
  static PauliTuple z_type(const BitMatrix& rows);
  /// X-type tuple: rows of `rows` as sigma1 products.
  static PauliTuple x_type(const BitMatrix& rows);

 private:
  std::size_t n_;
  BitMatrix x_, z_;
};

/// |psi_{alpha beta}> = (I ox sigma1^alpha sigma3^beta) 2^{-n/2} sum_z |zz>
/// on 2n qubits; register A is qubits 0..n-1, register B is qubits n..2n-1.
StateVec bell_state(const BellIndex& idx);

/// Dense P(g, x) = 2^{-m} prod_j (I + (-1)^{x_j} g_j).
Eigen::MatrixXcd projector(const PauliTuple& t, const BitVector& x);

struct MeasureResult {
  BitVector outcome;
  StateVec post;
  double prob = 0.0;
};

/// Projective measurement of the tuple's joint eigenspaces. Outcomes are
/// sampled by cumulative-probability inversion in lexicographic outcome
/// order (outcome bit 0 most significant, 0-branch first).
MeasureResult measure_tuple(const StateVec& state, const PauliTuple& t, Rng& rng);

/// Verifies numerically that (P(g,x) ox P(g,y)) |psi_ab> is nonzero exactly
/// when x = y + F(g) S (alpha; beta)^T, and equals (P(g,x) ox I)|psi_ab>
/// there. Tolerance 1e-9.
bool check_bell_action(const PauliTuple& t, const BellIndex& idx);

struct OracleOutcomes {
  BitVector u_a, u_b, v_a, v_b, w_a, w_b;
};

/// Exact quantum-side run of the measurement phase: prepares the Bell state
/// for `idx` and measures L1 sigma3 on A then B, M2 sigma1 on A then B,
/// M3 sigma1 on A then B. Requires n <= 4.
OracleOutcomes oracle_protocol_run(const KeySchedule& ks, const BellIndex& idx,
                                   Rng& rng);

}  // namespace qkd
