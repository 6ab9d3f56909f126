#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qkd/bits.hpp"

namespace qkd {

struct BallTooLargeError : std::runtime_error {
  BallTooLargeError() : std::runtime_error("ball too large") {}
};

/// Hamming ball B_n(0, r). Requires 2r <= n.
struct BallSpec {
  std::size_t n = 0;
  std::size_t r = 0;
};

void validate(const BallSpec& spec);

/// A decoded error pattern, or bottom when no acceptable pattern exists.
struct DecodeResult {
  std::optional<BitVector> pattern;

  bool is_bottom() const { return !pattern.has_value(); }
  static DecodeResult bottom() { return {}; }
  static DecodeResult of(BitVector v) { return {std::move(v)}; }
  bool operator==(const DecodeResult&) const = default;
};

/// Binary entropy -p log2 p - (1-p) log2 (1-p), with h(0) = h(1) = 0.
double binary_entropy(double p);

/// |B_n(0,r)| = sum_{i=0}^{r} C(n, i), exact.
BigInt ball_size(const BallSpec& spec);

/// Enumerates B_n(0,r) by increasing Hamming weight, lexicographic on
/// (s_1, ..., s_n) within each weight; the zero vector comes first.
class BallEnumerator {
 public:
  explicit BallEnumerator(BallSpec spec);

  /// Advance to the next element. Returns false when exhausted.
  /// After a true return, support() lists the set coordinates ascending.
  bool next();
  const std::vector<std::size_t>& support() const { return support_; }
  BitVector value() const;

 private:
  BallSpec spec_;
  std::size_t weight_ = 0;
  bool started_ = false;
  bool done_ = false;
  // combination indices in the reflected coordinate j = n-1-i, kept in
  // colex order so that the bit strings come out in ascending lex order
  std::vector<std::size_t> jidx_;
  std::vector<std::size_t> support_;
  void sync_support();
  bool start_weight(std::size_t w);
};

/// f_S for S = B_n(0,r): the pattern itself when inside the ball, else bottom.
DecodeResult f_ball(const BitVector& alpha, const BallSpec& spec);

/// g_S for S = B_n(0,r): first ball element s (in BallEnumerator order)
/// with H s = y, or bottom. Refuses balls larger than 2^32 elements.
DecodeResult g_ball(const BitMatrix& h, const BitVector& y, const BallSpec& spec);

}  // namespace qkd
