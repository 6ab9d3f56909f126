#include "qkd/selftest.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "qkd/bits.hpp"
#include "qkd/hashball.hpp"
#include "qkd/pauli.hpp"
#include "qkd/protocol.hpp"
#include "qkd/rates.hpp"
#include "qkd/stats.hpp"

namespace qkd {

namespace {

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) why << "; ";
      why << what;
      ok = false;
    }
  }
};

void suite_f2(Check& c, Rng& rng) {
  // inversion round trips at assorted sizes
  for (std::size_t n : {1, 2, 3, 5, 8, 16, 33, 64}) {
    BitMatrix l = sample_invertible(n, rng);
    c.expect(l.rank() == n, "sampled matrix not full rank");
    c.expect(multiply(l, l.inverse()) == BitMatrix::identity(n),
             "inverse round trip failed at n=" + std::to_string(n));
    c.expect(l.transpose().transpose() == l, "transpose not an involution");
  }
  // exhaustive collision probability of the full-rank family, n <= 3
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      std::vector<BigInt> zero_counts(std::size_t{1} << n, 0);
      BigInt total = 0;
      for_each_full_rank(k, n, [&](const BitMatrix& l) {
        ++total;
        for (std::uint64_t x = 1; x < (std::uint64_t{1} << n); ++x) {
          BitVector xv = BitVector::from_index(x, n);
          if (multiply(l, xv).is_zero()) ++zero_counts[x];
        }
      });
      c.expect(total == count_full_rank(k, n), "full-rank count mismatch");
      BigRational want = exact_collision_probability(k, n);
      for (std::uint64_t x = 1; x < (std::uint64_t{1} << n); ++x)
        c.expect(BigRational(zero_counts[x], total) == want,
                 "collision probability off at n=" + std::to_string(n) +
                     " k=" + std::to_string(k));
    }
  }
  // uniformity of sample_invertible over the 6 invertible 2x2 matrices
  std::map<std::string, double> counts;
  const std::size_t draws = 6000;
  for (std::size_t i = 0; i < draws; ++i)
    counts[sample_invertible(2, rng).to_text()] += 1.0;
  c.expect(counts.size() == 6, "GL(2) sample missed a matrix");
  std::vector<double> obs, exp_counts;
  for (auto& [key, cnt] : counts) {
    obs.push_back(cnt);
    exp_counts.push_back(draws / 6.0);
  }
  double p = chi_squared_pvalue(chi_squared_stat(obs, exp_counts),
                                static_cast<double>(counts.size() - 1));
  c.expect(p > 1e-4, "GL(2) uniformity chi-square p=" + std::to_string(p));
}

void suite_hashball(Check& c, Rng&) {
  c.expect(ball_size({4, 1}) == 5 && ball_size({64, 8}) == BigInt("5130659561"),
           "ball size wrong");
  // enumeration order: weight first, then lexicographic
  BallEnumerator it({3, 1});
  std::vector<std::string> seen;
  while (it.next()) seen.push_back(it.value().to_string());
  c.expect(seen == std::vector<std::string>{"000", "001", "010", "100"},
           "enumeration order wrong");
  // exhaustive decoder failure bound at n=4, k=3, r=1
  BallSpec spec{4, 1};
  double eps = static_cast<double>(BigRational(exact_collision_probability(3, 4)));
  double ball = static_cast<double>(ball_size(spec));
  BigInt total = 0, failures = 0;
  for_each_full_rank(3, 4, [&](const BitMatrix& l) {
    for (std::uint64_t a = 0; a < 16; ++a) {
      BitVector alpha = BitVector::from_index(a, 4);
      ++total;
      if (g_ball(l, multiply(l, alpha), spec) != f_ball(alpha, spec)) ++failures;
    }
  });
  double frac = static_cast<double>(BigRational(failures, total));
  c.expect(frac <= eps * ball + 1e-15, "decoder failure fraction above eps*|S|");
  double cor = std::exp2(-3.0 + 4.0 * binary_entropy(0.25));
  c.expect(frac < cor, "decoder failure fraction above corollary bound");
}

void suite_pauli(Check& c, Rng& rng) {
  for (int inst = 0; inst < 20; ++inst) {
    std::size_t n = 2 + inst % 2;
    std::size_t m = 1 + rng.next_below(n);
    // rejection-sample a valid tuple
    for (int tries = 0; tries < 200; ++tries) {
      BitMatrix x = BitMatrix::random(m, n, rng);
      BitMatrix z = BitMatrix::random(m, n, rng);
      try {
        PauliTuple t(n, x, z);
        BellIndex idx{BitVector::random(n, rng), BitVector::random(n, rng)};
        c.expect(check_bell_action(t, idx), "bell action check failed");
        // projector is idempotent and symmetric
        BitVector out = BitVector::random(m, rng);
        Eigen::MatrixXcd p = projector(t, out);
        c.expect((p * p - p).norm() < 1e-9, "projector not idempotent");
        c.expect((p - p.transpose()).norm() < 1e-9, "projector not symmetric");
        break;
      } catch (const std::invalid_argument&) {
      }
    }
  }
  StateVec psi = bell_state({BitVector(3), BitVector(3)});
  c.expect(std::fabs(psi.norm_sq() - 1.0) < 1e-12, "bell state not normalized");
}

void suite_protocol(Check& c, Rng& rng) {
  ProtocolParams p{3, 1, 1};
  std::vector<std::pair<std::string, std::string>> patterns = {{"000", "000"},
                                                               {"100", "010"}};
  for (auto& [as, bs] : patterns) {
    BitVector alpha = BitVector::from_string(as);
    BitVector beta = BitVector::from_string(bs);
    KeySchedule ks = key_schedule(sample_invertible(3, rng), 1);
    std::map<std::uint64_t, double> hist;
    const std::size_t runs = 1500;
    for (std::size_t i = 0; i < runs; ++i) {
      RunRecord rec = run_with_schedule(p, ks, alpha, beta,
                                        Backend::statevector, rng);
      c.expect(rec.u_b == (rec.u_a ^ multiply(ks.L1, alpha)), "u offset broken");
      c.expect(rec.v_b == (rec.v_a ^ multiply(ks.M2, beta)), "v offset broken");
      c.expect(rec.w_b == (rec.w_a ^ multiply(ks.M3, beta)), "w offset broken");
      std::uint64_t key = rec.u_a.to_index() | (rec.v_a.to_index() << 1) |
                          (rec.w_a.to_index() << 2);
      hist[key] += 1.0 / runs;
      if (!c.ok) return;
    }
    std::vector<double> obs(8, 0.0), uni(8, 0.125);
    for (auto& [key, mass] : hist) obs[key] = mass;
    double tv = total_variation(obs, uni);
    c.expect(tv < 0.08, "oracle outcome distribution far from fast law, tv=" +
                            std::to_string(tv));
  }
  // fast backend end to end; k is far above n h(r/n), so in-ball decode
  // collisions are vanishingly rare
  ProtocolParams big{64, 28, 1};
  EveModel eve = EveModel::fixed(BitVector::from_hex("8000000000000000", 64),
                                 BitVector::from_hex("0000000100000000", 64));
  BatchSummary s = run_batch(big, eve, Backend::fast, rng.next_u64(), 300);
  c.expect(s.accepts == s.trials, "in-ball pattern did not always accept");
  c.expect(s.mismatches == 0, "key mismatch on in-ball pattern");
  // transcript round trip
  RunRecord rec = run(big, eve, Backend::fast, 42);
  RunRecord back = transcript_parse(transcript_serialize(rec));
  c.expect(transcript_serialize(back) == transcript_serialize(rec),
           "transcript round trip changed the record");
}

void suite_rates(Check& c, Rng&) {
  TuhReport rep = tuh_report({3100, 0.0451, 1e-80, Rounding::floor_r});
  c.expect(rep.output_size >= 377 && rep.output_size <= 393,
           "headline output size off: " + std::to_string(rep.output_size));
  std::size_t nmin = min_blocksize(0.0451, 1e-6, 6, Rounding::floor_r);
  c.expect(nmin >= 190 && nmin <= 215,
           "minimal block size off: " + std::to_string(nmin));
  // deviation sandwich under direct rounding
  for (std::size_t n : {500, 2000, 10000, 250000}) {
    for (double delta : {0.01, 0.0451, 0.08}) {
      for (double eps : {1e-6, 1e-40, 1e-80}) {
        TuhReport t = tuh_report({n, delta, eps, Rounding::rate_direct});
        if (!t.feasible) continue;
        double dev = (1.0 - 2.0 * binary_entropy(delta)) - t.rate;
        double lo = (4.0 * std::log2(1.0 / eps) + 10.0) / static_cast<double>(n);
        double hi = (4.0 * std::log2(1.0 / eps) + 12.0) / static_cast<double>(n);
        c.expect(dev >= lo - 1e-12 && dev <= hi + 1e-12,
                 "deviation sandwich violated at n=" + std::to_string(n));
      }
    }
  }
  SamplingReport sr = sampling_optimize({3100, 0.0451, 1e-6, 60, 60, 40});
  BoundReport br = sampling_upper_bound(3100, 0.0451, 1e-6);
  c.expect(sr.feasible, "sampling optimizer found nothing at n=3100");
  c.expect(sr.rate <= br.bound_rate + 1e-12, "sampling rate above its bound");
  c.expect(sr.eps_qkd_achieved <= 1e-6 * (1.0 + 1e-9), "epsilon budget exceeded");
}

SuiteResult timed(const std::string& name, void (*fn)(Check&, Rng&), Rng& rng) {
  SuiteResult r;
  r.name = name;
  auto t0 = std::chrono::steady_clock::now();
  Check c;
  try {
    fn(c, rng);
    r.passed = c.ok;
    r.detail = c.ok ? "ok" : c.why.str();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  r.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return r;
}

}  // namespace

std::vector<std::string> selftest_suites() {
  return {"f2", "hashball", "pauli", "protocol", "rates"};
}

std::vector<SuiteResult> run_selftest(const std::vector<std::string>& names,
                                      std::uint64_t seed) {
  std::map<std::string, void (*)(Check&, Rng&)> table = {
      {"f2", suite_f2},
      {"hashball", suite_hashball},
      {"pauli", suite_pauli},
      {"protocol", suite_protocol},
      {"rates", suite_rates},
  };
  std::vector<std::string> wanted = names.empty() ? selftest_suites() : names;
  std::vector<SuiteResult> out;
  std::size_t i = 0;
  for (const auto& name : wanted) {
    auto it = table.find(name);
    if (it == table.end())
      throw std::invalid_argument("unknown selftest suite: " + name);
    Rng rng(child_seed(seed, i++));
    out.push_back(timed(name, it->second, rng));
  }
  return out;
}

}  // namespace qkd
