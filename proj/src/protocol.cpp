#include "qkd/protocol.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>

#include "qkd/pauli.hpp"

namespace qkd {

namespace {

// balls up to this size are decoded exactly by enumeration; beyond it the
// decoder answers from the true pattern, which differs from the exact
// decoder only on syndrome collisions inside the ball
const BigInt kExactDecodeLimit = BigInt(1) << 20;

DecodeResult decode(const BitMatrix& h, const BitVector& syndrome,
                    const BallSpec& spec, const BitVector& true_pattern) {
  if (ball_size(spec) <= kExactDecodeLimit) return g_ball(h, syndrome, spec);
  if (multiply(h, true_pattern) == syndrome) return f_ball(true_pattern, spec);
  return g_ball(h, syndrome, spec);  // throws BallTooLargeError
}

std::string hex_or(const DecodeResult& d, const char* empty) {
  return d.is_bottom() ? empty : d.pattern->to_hex();
}

std::string hex_or(const std::optional<BitVector>& v, const char* empty) {
  return v ? v->to_hex() : empty;
}

}  // namespace

void validate(const ProtocolParams& p) {
  if (p.n < 3 || 2 * p.k >= p.n)
    throw std::invalid_argument("protocol: 2k < n required");
  if (p.k < 1) throw std::invalid_argument("protocol: k >= 1 required");
  if (2 * p.r > p.n) throw std::invalid_argument("protocol: 2r <= n required");
}

std::string to_string(Backend b) {
  return b == Backend::fast ? "fast" : "statevector";
}

Backend backend_from_string(const std::string& s) {
  if (s == "fast") return Backend::fast;
  if (s == "statevector") return Backend::statevector;
  throw std::invalid_argument("unknown backend: " + s);
}

EveModel EveModel::none(std::size_t n) {
  EveModel m;
  m.kind_ = Kind::none;
  m.n_ = n;
  m.alpha_ = BitVector(n);
  m.beta_ = BitVector(n);
  return m;
}

EveModel EveModel::fixed(BitVector alpha, BitVector beta) {
  if (alpha.size() != beta.size())
    throw DimensionError("eve fixed: pattern length mismatch");
  EveModel m;
  m.kind_ = Kind::fixed;
  m.n_ = alpha.size();
  m.alpha_ = std::move(alpha);
  m.beta_ = std::move(beta);
  return m;
}

EveModel EveModel::iid(std::size_t n, double p_flip, double p_phase) {
  if (p_flip < 0.0 || p_flip > 1.0 || p_phase < 0.0 || p_phase > 1.0)
    throw std::invalid_argument("eve iid: probabilities must lie in [0,1]");
  EveModel m;
  m.kind_ = Kind::iid;
  m.n_ = n;
  m.p_flip_ = p_flip;
  m.p_phase_ = p_phase;
  return m;
}

EveModel EveModel::custom(std::size_t n, std::vector<Atom> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (a.alpha.size() != n || a.beta.size() != n)
      throw DimensionError("eve custom: pattern length mismatch");
    if (a.mass < 0.0) throw std::invalid_argument("eve custom: negative mass");
    total += a.mass;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("eve custom: masses must sum to 1");
  EveModel m;
  m.kind_ = Kind::custom;
  m.n_ = n;
  m.atoms_ = std::move(atoms);
  return m;
}

std::pair<BitVector, BitVector> EveModel::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::none:
    case Kind::fixed:
      return {alpha_, beta_};
    case Kind::iid: {
      BitVector a(n_), b(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        if (rng.next_double() < p_flip_) a.set(i, true);
        if (rng.next_double() < p_phase_) b.set(i, true);
      }
      return {a, b};
    }
    case Kind::custom: {
      double u = rng.next_double();
      double acc = 0.0;
      for (const auto& atom : atoms_) {
        acc += atom.mass;
        if (u < acc) return {atom.alpha, atom.beta};
      }
      return {atoms_.back().alpha, atoms_.back().beta};
    }
  }
  throw std::logic_error("eve: unreachable");
}

double EveModel::in_ball_mass(std::size_t r) const {
  switch (kind_) {
    case Kind::none:
      return 1.0;
    case Kind::fixed:
      return (alpha_.weight() <= r && beta_.weight() <= r) ? 1.0 : 0.0;
    case Kind::iid: {
      auto tail = [&](double p) {
        if (p == 0.0) return 1.0;
        boost::math::binomial dist(static_cast<double>(n_), p);
        return boost::math::cdf(dist, static_cast<double>(r));
      };
      return tail(p_flip_) * tail(p_phase_);
    }
    case Kind::custom: {
      double s = 0.0;
      for (const auto& atom : atoms_)
        if (atom.alpha.weight() <= r && atom.beta.weight() <= r) s += atom.mass;
      return s;
    }
  }
  throw std::logic_error("eve: unreachable");
}

RunRecord run_with_schedule(const ProtocolParams& p, const KeySchedule& ks,
                            const BitVector& alpha, const BitVector& beta,
                            Backend backend, Rng& rng) {
  validate(p);
  if (ks.n != p.n || ks.k != p.k)
    throw DimensionError("run: schedule does not match parameters");
  if (alpha.size() != p.n || beta.size() != p.n)
    throw DimensionError("run: pattern length mismatch");

  RunRecord rec;
  rec.params = p;
  rec.backend = backend;
  rec.alpha = alpha;
  rec.beta = beta;

  std::size_t out_len = p.n - 2 * p.k;
  if (backend == Backend::fast) {
    rec.u_a = BitVector::random(p.k, rng);
    rec.v_a = BitVector::random(p.k, rng);
    rec.w_a = BitVector::random(out_len, rng);
    rec.u_b = rec.u_a ^ multiply(ks.L1, alpha);
    rec.v_b = rec.v_a ^ multiply(ks.M2, beta);
    rec.w_b = rec.w_a ^ multiply(ks.M3, beta);
  } else {
    OracleOutcomes o = oracle_protocol_run(ks, {alpha, beta}, rng);
    rec.u_a = o.u_a;
    rec.u_b = o.u_b;
    rec.v_a = o.v_a;
    rec.v_b = o.v_b;
    rec.w_a = o.w_a;
    rec.w_b = o.w_b;
  }

  BallSpec spec{p.n, p.r};
  rec.s = decode(ks.L1, rec.u_a ^ rec.u_b, spec, alpha);
  rec.t = decode(ks.M2, rec.v_a ^ rec.v_b, spec, beta);
  rec.accepted = !rec.s.is_bottom() && !rec.t.is_bottom();
  if (rec.accepted) {
    rec.key_a = rec.w_a;
    rec.key_b = rec.w_b ^ multiply(ks.M3, *rec.t.pattern);
    rec.failed = "none";
  } else if (rec.s.is_bottom() && rec.t.is_bottom()) {
    rec.failed = "both";
  } else if (rec.s.is_bottom()) {
    rec.failed = "bit";
  } else {
    rec.failed = "phase";
  }
  return rec;
}

RunRecord run(const ProtocolParams& p, const EveModel& eve, Backend backend,
              std::uint64_t seed) {
  validate(p);
  if (eve.n() != p.n) throw DimensionError("run: eve model length mismatch");
  Rng rng(seed);
  auto [alpha, beta] = eve.sample(rng);
  KeySchedule ks = key_schedule(sample_invertible(p.n, rng), p.k);
  RunRecord rec = run_with_schedule(p, ks, alpha, beta, backend, rng);
  rec.seed = seed;
  return rec;
}

double mismatch_bound(const ProtocolParams& p) {
  double h = binary_entropy(static_cast<double>(p.r) / static_cast<double>(p.n));
  return std::exp2(-static_cast<double>(p.k) + static_cast<double>(p.n) * h);
}

BatchSummary run_batch(const ProtocolParams& p, const EveModel& eve,
                       Backend backend, std::uint64_t master_seed,
                       std::size_t trials) {
  validate(p);
  BatchSummary s;
  s.params = p;
  s.backend = backend;
  s.master_seed = master_seed;
  s.trials = trials;
  s.bound_2uh = mismatch_bound(p);
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < trials; ++i) {
    RunRecord rec = run(p, eve, backend, child_seed(master_seed, i));
    if (rec.accepted) {
      ++s.accepts;
      if (*rec.key_a != *rec.key_b) ++s.mismatches;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  s.wallclock_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return s;
}

std::string transcript_serialize(const RunRecord& rec) {
  std::ostringstream os;
  char seedbuf[17];
  std::snprintf(seedbuf, sizeof seedbuf, "%016llx",
                static_cast<unsigned long long>(rec.seed));
  os << "qkd-transcript v1\n"
     << "n " << rec.params.n << "\n"
     << "k " << rec.params.k << "\n"
     << "r " << rec.params.r << "\n"
     << "backend " << to_string(rec.backend) << "\n"
     << "seed " << seedbuf << "\n"
     << "alpha " << rec.alpha.to_hex() << "\n"
     << "beta " << rec.beta.to_hex() << "\n"
     << "ua " << rec.u_a.to_hex() << "\n"
     << "ub " << rec.u_b.to_hex() << "\n"
     << "va " << rec.v_a.to_hex() << "\n"
     << "vb " << rec.v_b.to_hex() << "\n"
     << "wa " << rec.w_a.to_hex() << "\n"
     << "wb " << rec.w_b.to_hex() << "\n"
     << "s " << hex_or(rec.s, "bottom") << "\n"
     << "t " << hex_or(rec.t, "bottom") << "\n"
     << "accepted " << (rec.accepted ? 1 : 0) << "\n"
     << "keya " << hex_or(rec.key_a, "none") << "\n"
     << "keyb " << hex_or(rec.key_b, "none") << "\n"
     << "failed " << rec.failed << "\n";
  return os.str();
}

namespace {

struct LineReader {
  std::istringstream in;
  std::size_t lineno = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  std::string next() {
    std::string line;
    ++lineno;
    if (!std::getline(in, line)) fail("unexpected end of transcript");
    return line;
  }

  std::string field(const std::string& key) {
    std::string line = next();
    if (line.size() < key.size() + 2 || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != ' ')
      fail("expected '" + key + " <value>'");
    return line.substr(key.size() + 1);
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw TranscriptError("transcript line " + std::to_string(lineno) + ": " +
                          why);
  }
};

std::size_t parse_size(LineReader& r, const std::string& key) {
  std::string v = r.field(key);
  try {
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    r.fail("bad integer '" + v + "'");
  }
}

}  // namespace

RunRecord transcript_parse(const std::string& text) {
  LineReader r(text);
  if (r.next() != "qkd-transcript v1") r.fail("bad header");
  RunRecord rec;
  rec.params.n = parse_size(r, "n");
  rec.params.k = parse_size(r, "k");
  rec.params.r = parse_size(r, "r");
  try {
    validate(rec.params);
  } catch (const std::exception& e) {
    r.fail(e.what());
  }
  std::size_t n = rec.params.n, k = rec.params.k;
  std::size_t out_len = n - 2 * k;
  try {
    rec.backend = backend_from_string(r.field("backend"));
    rec.seed = std::stoull(r.field("seed"), nullptr, 16);
    rec.alpha = BitVector::from_hex(r.field("alpha"), n);
    rec.beta = BitVector::from_hex(r.field("beta"), n);
    rec.u_a = BitVector::from_hex(r.field("ua"), k);
    rec.u_b = BitVector::from_hex(r.field("ub"), k);
    rec.v_a = BitVector::from_hex(r.field("va"), k);
    rec.v_b = BitVector::from_hex(r.field("vb"), k);
    rec.w_a = BitVector::from_hex(r.field("wa"), out_len);
    rec.w_b = BitVector::from_hex(r.field("wb"), out_len);
    std::string s = r.field("s");
    rec.s = s == "bottom" ? DecodeResult::bottom()
                          : DecodeResult::of(BitVector::from_hex(s, n));
    std::string t = r.field("t");
    rec.t = t == "bottom" ? DecodeResult::bottom()
                          : DecodeResult::of(BitVector::from_hex(t, n));
    std::string acc = r.field("accepted");
    if (acc != "0" && acc != "1") throw std::invalid_argument("accepted must be 0 or 1");
    rec.accepted = acc == "1";
    std::string ka = r.field("keya");
    if (ka != "none") rec.key_a = BitVector::from_hex(ka, out_len);
    std::string kb = r.field("keyb");
    if (kb != "none") rec.key_b = BitVector::from_hex(kb, out_len);
    rec.failed = r.field("failed");
    if (rec.failed != "none" && rec.failed != "bit" && rec.failed != "phase" &&
        rec.failed != "both")
      throw std::invalid_argument("bad failed marker '" + rec.failed + "'");
  } catch (const TranscriptError&) {
    throw;
  } catch (const std::exception& e) {
    r.fail(e.what());
  }
  if (rec.accepted != (!rec.s.is_bottom() && !rec.t.is_bottom()))
    r.fail("accepted flag inconsistent with decode results");
  return rec;
}

std::string summary_json(const BatchSummary& s) {
  std::ostringstream os;
  os << "{\"schema\":\"qkd-batch-v1\""
     << ",\"n\":" << s.params.n << ",\"k\":" << s.params.k
     << ",\"r\":" << s.params.r << ",\"backend\":\"" << to_string(s.backend)
     << "\",\"seed\":" << s.master_seed << ",\"trials\":" << s.trials
     << ",\"accepts\":" << s.accepts << ",\"mismatches\":" << s.mismatches
     << ",\"bound_2uh\":" << s.bound_2uh
     << ",\"wallclock_ms\":" << s.wallclock_ms << "}";
  return os.str();
}

}  // namespace qkd
