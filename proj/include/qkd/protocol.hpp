#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkd/bits.hpp"
#include "qkd/hashball.hpp"
#include "qkd/rng.hpp"

namespace qkd {

struct TranscriptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Block size n, syndrome size k per hash test, tolerated errors r.
/// Requires 2k < n and 2r <= n.
struct ProtocolParams {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t r = 0;
};

void validate(const ProtocolParams& p);

enum class Backend { fast, statevector };
std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// Distribution of the (bit-flip, phase-flip) error pattern pair.
class EveModel {
 public:
  struct Atom {
    BitVector alpha, beta;
    double mass = 0.0;
  };

  static EveModel none(std::size_t n);
  static EveModel fixed(BitVector alpha, BitVector beta);
  /// Each coordinate flips independently.
  static EveModel iid(std::size_t n, double p_flip, double p_phase);
  static EveModel custom(std::size_t n, std::vector<Atom> atoms);

  std::size_t n() const { return n_; }
  std::pair<BitVector, BitVector> sample(Rng& rng) const;

  /// Probability mass on pairs with both patterns inside the ball of
  /// radius r. On that event the run accepts with certainty.
  double in_ball_mass(std::size_t r) const;

 private:
  enum class Kind { none, fixed, iid, custom };
  Kind kind_ = Kind::none;
  std::size_t n_ = 0;
  BitVector alpha_, beta_;
  double p_flip_ = 0.0, p_phase_ = 0.0;
  std::vector<Atom> atoms_;
};

struct RunRecord {
  ProtocolParams params;
  Backend backend = Backend::fast;
  std::uint64_t seed = 0;
  BitVector alpha, beta;
  BitVector u_a, u_b, v_a, v_b, w_a, w_b;
  DecodeResult s, t;  // decoded bit-flip and phase-flip estimates
  bool accepted = false;
  std::optional<BitVector> key_a, key_b;
  std::string failed = "none";  // none | bit | phase | both
};

/// One full run. The statevector backend requires n <= 4 and reproduces
/// the measurement phase exactly; the fast backend uses the equivalent
/// closed-form law of the outcomes.
RunRecord run(const ProtocolParams& p, const EveModel& eve, Backend backend,
              std::uint64_t seed);

/// Same, with a caller-fixed key schedule and error pattern.
RunRecord run_with_schedule(const ProtocolParams& p, const KeySchedule& ks,
                            const BitVector& alpha, const BitVector& beta,
                            Backend backend, Rng& rng);

struct BatchSummary {
  ProtocolParams params;
  Backend backend = Backend::fast;
  std::uint64_t master_seed = 0;
  std::size_t trials = 0;
  std::size_t accepts = 0;
  std::size_t mismatches = 0;  // accepted runs with key_a != key_b
  double bound_2uh = 0.0;      // 2^{-k + n h(r/n)} per-test failure bound
  double wallclock_ms = 0.0;
};

/// Independent runs with per-trial seed child_seed(master_seed, i).
BatchSummary run_batch(const ProtocolParams& p, const EveModel& eve,
                       Backend backend, std::uint64_t master_seed,
                       std::size_t trials);

double mismatch_bound(const ProtocolParams& p);

std::string transcript_serialize(const RunRecord& rec);
RunRecord transcript_parse(const std::string& text);

std::string summary_json(const BatchSummary& s);

}  // namespace qkd
