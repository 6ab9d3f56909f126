#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qkd/rng.hpp"

namespace qkd {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct SingularMatrixError : std::runtime_error {
  SingularMatrixError() : std::runtime_error("matrix is not invertible over GF(2)") {}
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense vector over GF(2), bit-packed into 64-bit words.
/// Coordinate i lives in word i/64 at bit i%64.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  /// Parse from a string of '0'/'1' characters; s[0] is coordinate 0.
  static BitVector from_string(std::string_view s);

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  void set(std::size_t i, bool v) {
    std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t weight() const;
  bool is_zero() const;

  BitVector& operator^=(const BitVector& o);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend BitVector operator+(BitVector a, const BitVector& b) { return a ^= b; }

  bool operator==(const BitVector&) const = default;

  std::string to_string() const;

  /// Lowercase hex, big-endian bit order: coordinate 0 is the most
  /// significant bit of the first nibble; trailing bits of the last
  /// nibble are zero padding. Width is ceil(n/4) characters.
  std::string to_hex() const;
  static BitVector from_hex(std::string_view hex, std::size_t n);

  const std::vector<std::uint64_t>& words() const { return w_; }
  std::vector<std::uint64_t>& words() { return w_; }

  /// Integer with coordinate 0 as the least significant bit. n <= 64 only.
  std::uint64_t to_index() const;
  static BitVector from_index(std::uint64_t v, std::size_t n);

  static BitVector random(std::size_t n, Rng& rng);

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

/// Dense matrix over GF(2), row-major, each row bit-packed.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), w_(rows * wpr_, 0) {}

  static BitMatrix identity(std::size_t n);
  static BitMatrix zero(std::size_t rows, std::size_t cols) { return BitMatrix(rows, cols); }
  static BitMatrix from_strings(const std::vector<std::string>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return wpr_; }

  bool get(std::size_t i, std::size_t j) const {
    return (w_[i * wpr_ + (j >> 6)] >> (j & 63)) & 1;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    std::uint64_t m = std::uint64_t{1} << (j & 63);
    if (v)
      w_[i * wpr_ + (j >> 6)] |= m;
    else
      w_[i * wpr_ + (j >> 6)] &= ~m;
  }

  const std::uint64_t* row_ptr(std::size_t i) const { return w_.data() + i * wpr_; }
  std::uint64_t* row_ptr(std::size_t i) { return w_.data() + i * wpr_; }

  BitVector row(std::size_t i) const;
  void set_row(std::size_t i, const BitVector& v);
  BitVector column(std::size_t j) const;

  /// Rows [begin, end) as a new matrix.
  BitMatrix row_slice(std::size_t begin, std::size_t end) const;

  BitMatrix transpose() const;

  std::size_t rank() const;
  BitMatrix inverse() const;  // throws SingularMatrixError

  bool operator==(const BitMatrix&) const = default;

  /// One row per line, '0'/'1' characters, no separators.
  std::string to_text() const;
  static BitMatrix from_text(std::string_view text);

  static BitMatrix random(std::size_t rows, std::size_t cols, Rng& rng);

 private:
  std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
  std::vector<std::uint64_t> w_;
};

BitMatrix multiply(const BitMatrix& a, const BitMatrix& b);
BitVector multiply(const BitMatrix& a, const BitVector& x);
inline BitMatrix operator*(const BitMatrix& a, const BitMatrix& b) { return multiply(a, b); }
inline BitVector operator*(const BitMatrix& a, const BitVector& x) { return multiply(a, x); }

/// Uniform over invertible n x n matrices, by per-row rejection (a row is
/// redrawn while it falls in the span of the rows before it). Deterministic
/// given the stream state.
BitMatrix sample_invertible(std::size_t n, Rng& rng);

/// Number of rank-k matrices in F2^{k x n}: prod_{i=1..k} (2^n - 2^{i-1}).
BigInt count_full_rank(std::size_t k, std::size_t n);

/// Exact collision probability (2^{n-k}-1)/(2^n-1) of the full-rank family.
BigRational exact_collision_probability(std::size_t k, std::size_t n);

/// L invertible n x n, its row blocks, and M = (L^{-1})^T with blocks.
struct KeySchedule {
  std::size_t n = 0, k = 0;
  BitMatrix L, L1, L2, L3;
  BitMatrix M, M1, M2, M3;
};

/// Requires L invertible and 2k < n.
KeySchedule key_schedule(const BitMatrix& L, std::size_t k);

/// Enumerate every full-rank k x n matrix over GF(2). Desk scale only
/// (refuses n > 5). Row candidates are chosen in increasing index order,
/// so the enumeration order is deterministic.
void for_each_full_rank(std::size_t k, std::size_t n,
                        const std::function<void(const BitMatrix&)>& fn);

inline void for_each_invertible(std::size_t n,
                                const std::function<void(const BitMatrix&)>& fn) {
  for_each_full_rank(n, n, fn);
}

}  // namespace qkd
