#include "qkd/hashball.hpp"

#include <cmath>

namespace qkd {

void validate(const BallSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("ball: n >= 1 required");
  if (2 * spec.r > spec.n) throw std::invalid_argument("ball: 2r <= n required");
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("binary_entropy: p outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;  // 0 log 0 = 0 by continuity
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

BigInt ball_size(const BallSpec& spec) {
  validate(spec);
  BigInt total = 0;
  BigInt binom = 1;  // C(n, 0)
  for (std::size_t i = 0; i <= spec.r; ++i) {
    total += binom;
    binom = binom * (spec.n - i) / (i + 1);
  }
  return total;
}

BallEnumerator::BallEnumerator(BallSpec spec) : spec_(spec) { validate(spec_); }

bool BallEnumerator::start_weight(std::size_t w) {
  if (w > spec_.r || w > spec_.n) return false;
  weight_ = w;
  jidx_.resize(w);
  for (std::size_t t = 0; t < w; ++t) jidx_[t] = t;
  sync_support();
  return true;
}

void BallEnumerator::sync_support() {
  support_.resize(jidx_.size());
  for (std::size_t t = 0; t < jidx_.size(); ++t)
    support_[jidx_.size() - 1 - t] = spec_.n - 1 - jidx_[t];
}

bool BallEnumerator::next() {
  if (done_) return false;
  if (!started_) {
    started_ = true;
    if (!start_weight(0)) {
      done_ = true;
      return false;
    }
    return true;
  }
  // colex successor within the current weight
  std::size_t w = weight_;
  std::size_t p = 0;
  while (p < w) {
    std::size_t limit = (p + 1 < w) ? jidx_[p + 1] : spec_.n;
    if (jidx_[p] + 1 < limit) break;
    ++p;
  }
  if (p < w) {
    ++jidx_[p];
    for (std::size_t t = 0; t < p; ++t) jidx_[t] = t;
    sync_support();
    return true;
  }
  if (start_weight(w + 1)) return true;
  done_ = true;
  return false;
}

BitVector BallEnumerator::value() const {
  BitVector v(spec_.n);
  for (std::size_t i : support_) v.set(i, true);
  return v;
}

DecodeResult f_ball(const BitVector& alpha, const BallSpec& spec) {
  validate(spec);
  if (alpha.size() != spec.n) throw DimensionError("f_ball: length mismatch");
  if (alpha.weight() <= spec.r) return DecodeResult::of(alpha);
  return DecodeResult::bottom();
}

DecodeResult g_ball(const BitMatrix& h, const BitVector& y, const BallSpec& spec) {
  validate(spec);
  if (h.cols() != spec.n) throw DimensionError("g_ball: H must have n columns");
  if (y.size() != h.rows()) throw DimensionError("g_ball: y length must match rows of H");
  if (ball_size(spec) > (BigInt(1) << 32)) throw BallTooLargeError();

  // columns of H packed once; each candidate syndrome is the xor of at
  // most r of them
  std::vector<BitVector> cols(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) cols[j] = h.column(j);

  BallEnumerator it(spec);
  BitVector syndrome(h.rows());
  while (it.next()) {
    for (auto& w : syndrome.words()) w = 0;
    for (std::size_t j : it.support()) syndrome ^= cols[j];
    if (syndrome == y) return DecodeResult::of(it.value());
  }
  return DecodeResult::bottom();
}

}  // namespace qkd
