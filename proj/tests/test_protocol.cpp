#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "qkd/protocol.hpp"
#include "qkd/stats.hpp"

using namespace qkd;

TEST_CASE("no errors: always accept, keys equal, zero patterns decoded") {
  ProtocolParams p{16, 5, 2};
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    RunRecord rec = run(p, EveModel::none(16), Backend::fast, seed);
    CHECK(rec.accepted);
    CHECK(rec.failed == "none");
    CHECK(rec.s == DecodeResult::of(BitVector(16)));
    CHECK(rec.t == DecodeResult::of(BitVector(16)));
    CHECK(*rec.key_a == *rec.key_b);
    CHECK(rec.u_a == rec.u_b);
    CHECK(rec.v_a == rec.v_b);
    CHECK(rec.w_a == rec.w_b);
  }
}

TEST_CASE("in-ball fixed pattern: exact decode gives matching keys") {
  ProtocolParams p{16, 6, 2};
  BitVector alpha = BitVector::from_string("1000000000000100");
  BitVector beta = BitVector::from_string("0000001000000000");
  EveModel eve = EveModel::fixed(alpha, beta);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RunRecord rec = run(p, eve, Backend::fast, seed);
    CHECK(rec.accepted);
    if (rec.s == DecodeResult::of(alpha) && rec.t == DecodeResult::of(beta))
      CHECK(*rec.key_a == *rec.key_b);
  }
}

TEST_CASE("out-of-ball pattern accepts only on hash collisions") {
  ProtocolParams p{12, 5, 1};
  BitVector alpha(12);
  for (std::size_t i = 0; i < 12; ++i) alpha.set(i, true);  // weight n
  EveModel eve = EveModel::fixed(alpha, BitVector(12));
  const std::size_t trials = 4000;
  std::size_t accepts = 0;
  for (std::uint64_t i = 0; i < trials; ++i)
    accepts += run(p, eve, Backend::fast, child_seed(99, i)).accepted;
  double bound = mismatch_bound(p);  // 2^{-k + n h(r/n)}
  double rate = static_cast<double>(accepts) / trials;
  double sigma = std::sqrt(bound * (1.0 - bound) / trials);
  CHECK(rate < bound + 3.0 * sigma);
}

TEST_CASE("which test failed is recorded") {
  ProtocolParams p{12, 5, 1};
  BitVector heavy(12);
  for (std::size_t i = 0; i < 12; ++i) heavy.set(i, true);
  std::map<std::string, int> seen;
  for (std::uint64_t i = 0; i < 300; ++i) {
    RunRecord a = run(p, EveModel::fixed(heavy, BitVector(12)), Backend::fast,
                      child_seed(1, i));
    if (!a.accepted) CHECK(a.failed == "bit");
    RunRecord b = run(p, EveModel::fixed(BitVector(12), heavy), Backend::fast,
                      child_seed(2, i));
    if (!b.accepted) CHECK(b.failed == "phase");
    RunRecord c = run(p, EveModel::fixed(heavy, heavy), Backend::fast,
                      child_seed(3, i));
    if (!c.accepted) seen[c.failed]++;
  }
  CHECK(seen.count("both") == 1);
}

TEST_CASE("statevector and fast backends agree in law (n=3, k=1, r=1)") {
  ProtocolParams p{3, 1, 1};
  Rng rng(31);
  KeySchedule ks = key_schedule(sample_invertible(3, rng), 1);
  BitVector alpha = BitVector::from_string("100");
  BitVector beta = BitVector::from_string("000");
  const std::size_t runs = 1000;
  std::vector<double> counts(8, 0.0);
  for (std::size_t i = 0; i < runs; ++i) {
    RunRecord rec =
        run_with_schedule(p, ks, alpha, beta, Backend::statevector, rng);
    CHECK(rec.u_b == (rec.u_a ^ multiply(ks.L1, alpha)));
    CHECK(rec.v_b == (rec.v_a ^ multiply(ks.M2, beta)));
    CHECK(rec.w_b == (rec.w_a ^ multiply(ks.M3, beta)));
    std::size_t cell = rec.u_a.to_index() | (rec.v_a.to_index() << 1) |
                       (rec.w_a.to_index() << 2);
    counts[cell] += 1.0;
  }
  // (u_A, v_A, w_A) is uniform on 8 cells under both backends
  std::vector<double> expected(8, runs / 8.0);
  double pval = chi_squared_pvalue(chi_squared_stat(counts, expected), 7.0);
  CHECK(pval > 0.01);
}

TEST_CASE("batches are deterministic and carry the hashing failure bound") {
  ProtocolParams p{64, 28, 1};
  EveModel eve = EveModel::iid(64, 0.002, 0.002);
  BatchSummary a = run_batch(p, eve, Backend::fast, 77, 500);
  BatchSummary b = run_batch(p, eve, Backend::fast, 77, 500);
  CHECK(a.accepts == b.accepts);
  CHECK(a.mismatches == b.mismatches);
  CHECK(summary_json(a).substr(0, summary_json(a).rfind("wallclock")) ==
        summary_json(b).substr(0, summary_json(b).rfind("wallclock")));
  CHECK(a.bound_2uh ==
        doctest::Approx(std::exp2(-28.0 + 64.0 * 0.11624 /*h(1/64)*/))
            .epsilon(1e-3));
  BatchSummary c = run_batch(p, eve, Backend::fast, 78, 500);
  CHECK(summary_json(c) != summary_json(a));
}

TEST_CASE("large blocks use the in-ball shortcut decoder") {
  // ball_size(256, 8) is far above the exact-decode cutoff
  ProtocolParams p{256, 100, 8};
  BitVector alpha(256), beta(256);
  for (std::size_t i : {0, 50, 100, 150, 200, 250}) alpha.set(i, true);
  for (std::size_t i : {3, 77, 123}) beta.set(i, true);
  EveModel eve = EveModel::fixed(alpha, beta);
  BatchSummary s = run_batch(p, eve, Backend::fast, 123, 200);
  CHECK(s.accepts == 200);
  CHECK(s.mismatches == 0);
  // out-of-ball weight is rejected through the same path
  BitVector heavy(256);
  for (std::size_t i = 0; i < 20; ++i) heavy.set(i * 3, true);
  RunRecord rec = run(p, EveModel::fixed(heavy, beta), Backend::fast, 5);
  CHECK_FALSE(rec.accepted);
  CHECK(rec.failed == "bit");
}

TEST_CASE("acceptance probability of error models") {
  CHECK(EveModel::none(10).in_ball_mass(0) == 1.0);
  BitVector w3 = BitVector::from_string("1110000000");
  CHECK(EveModel::fixed(w3, BitVector(10)).in_ball_mass(2) == 0.0);
  CHECK(EveModel::fixed(w3, BitVector(10)).in_ball_mass(3) == 1.0);

  std::vector<EveModel::Atom> atoms;
  atoms.push_back({BitVector(8), BitVector(8), 0.4});
  BitVector one(8);
  one.set(2, true);
  atoms.push_back({one, BitVector(8), 0.3});
  BitVector heavy = BitVector::from_string("11111000");
  atoms.push_back({heavy, BitVector(8), 0.3});
  EveModel mix = EveModel::custom(8, atoms);
  CHECK(mix.in_ball_mass(1) == doctest::Approx(0.7));

  // Monte Carlo agreement at desk scale
  ProtocolParams p{8, 3, 1};
  BatchSummary s = run_batch(p, mix, Backend::fast, 2024, 20000);
  double rate = static_cast<double>(s.accepts) / s.trials;
  // hash collisions can only push the rate above the certain-accept mass
  CHECK(rate >= 0.7 - 3.0 * std::sqrt(0.21 / 20000));
}

TEST_CASE("iid model respects its marginals") {
  EveModel eve = EveModel::iid(100, 0.05, 0.0);
  Rng rng(41);
  double total = 0.0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    auto [a, b] = eve.sample(rng);
    total += a.weight();
    CHECK(b.is_zero());
  }
  CHECK(total / reps == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("transcript round trip and error reporting") {
  ProtocolParams p{8, 3, 1};
  BitVector alpha(8);
  alpha.set(0, true);
  RunRecord rec = run(p, EveModel::fixed(alpha, BitVector(8)), Backend::fast, 9);
  std::string text = transcript_serialize(rec);
  RunRecord back = transcript_parse(text);
  CHECK(transcript_serialize(back) == text);
  CHECK(back.accepted == rec.accepted);
  CHECK(back.alpha == rec.alpha);

  // rejected runs carry the bottom marker
  BitVector heavy = BitVector::from_string("11111111");
  RunRecord rej = run(p, EveModel::fixed(heavy, heavy), Backend::fast, 9);
  if (!rej.accepted) {
    std::string t2 = transcript_serialize(rej);
    CHECK(t2.find("bottom") != std::string::npos);
    CHECK(t2.find("keya none") != std::string::npos);
    CHECK(transcript_serialize(transcript_parse(t2)) == t2);
  }

  SUBCASE("parse failures name the offending line") {
    CHECK_THROWS_WITH_AS(transcript_parse("nonsense"),
                         doctest::Contains("line 1"), TranscriptError);
    std::string bad = text;
    bad.replace(bad.find("alpha "), 6, "gamma ");
    CHECK_THROWS_WITH_AS(transcript_parse(bad), doctest::Contains("line 7"),
                         TranscriptError);
    std::string truncated = text.substr(0, text.find("\nua") + 1);
    CHECK_THROWS_AS(transcript_parse(truncated), TranscriptError);
  }
}

TEST_CASE("golden transcript stays reproducible") {
  std::ifstream f("tests/data/golden_transcript.txt");
  if (!f.is_open()) f.open("../tests/data/golden_transcript.txt");
  REQUIRE_MESSAGE(f.is_open(), "golden transcript file not found; run from repo root");
  std::stringstream buf;
  buf << f.rdbuf();
  std::string text = buf.str();
  RunRecord rec = transcript_parse(text);
  CHECK(transcript_serialize(rec) == text);
  // replaying the recorded seed against the recorded pattern reproduces
  // every field
  RunRecord replay = run(rec.params, EveModel::fixed(rec.alpha, rec.beta),
                         rec.backend, rec.seed);
  CHECK(transcript_serialize(replay) == text);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS(validate(ProtocolParams{8, 4, 1}));   // 2k = n
  CHECK_THROWS(validate(ProtocolParams{8, 3, 5}));   // 2r > n
  CHECK_THROWS(validate(ProtocolParams{8, 0, 1}));
  CHECK_THROWS(run(ProtocolParams{8, 3, 1}, EveModel::none(9), Backend::fast, 1));
}
