#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "qkd/hashball.hpp"

using namespace qkd;

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0451) == doctest::Approx(0.26520).epsilon(1e-4));
  for (double p : {0.1, 0.23, 0.4})
    CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1.0 - p)));
  CHECK_THROWS(binary_entropy(-0.1));
  CHECK_THROWS(binary_entropy(1.1));
}

TEST_CASE("ball sizes") {
  CHECK(ball_size({5, 0}) == 1);
  CHECK(ball_size({4, 1}) == 5);
  CHECK(ball_size({10, 2}) == 56);
  CHECK(ball_size({64, 8}) == BigInt("5130659561"));
  // entropy bound |B| < 2^{n h(r/n)} for 0 < r < n/2
  double bound = std::exp2(10.0 * binary_entropy(0.2));
  CHECK(static_cast<double>(ball_size({10, 2})) < bound);
  CHECK_THROWS(ball_size({4, 3}));  // 2r > n
}

TEST_CASE("enumeration is weight first, then lexicographic") {
  BallEnumerator it({3, 1});
  std::vector<std::string> got;
  while (it.next()) got.push_back(it.value().to_string());
  CHECK(got == std::vector<std::string>{"000", "001", "010", "100"});

  BallEnumerator it2({4, 2});
  std::vector<std::string> got2;
  while (it2.next()) got2.push_back(it2.value().to_string());
  CHECK(got2 == std::vector<std::string>{"0000", "0001", "0010", "0100", "1000",
                                         "0011", "0101", "0110", "1001", "1010",
                                         "1100"});
}

TEST_CASE("enumeration yields each ball element exactly once") {
  for (std::size_t n : {1, 5, 9, 12}) {
    for (std::size_t r = 0; 2 * r <= n; ++r) {
      BallEnumerator it({n, r});
      std::set<std::string> seen;
      std::size_t count = 0;
      std::size_t prev_weight = 0;
      while (it.next()) {
        BitVector v = it.value();
        CHECK(v.weight() <= r);
        CHECK(v.weight() >= prev_weight);  // weights never decrease
        prev_weight = v.weight();
        seen.insert(v.to_string());
        ++count;
      }
      CHECK(count == ball_size({n, r}));
      CHECK(seen.size() == count);
    }
  }
}

TEST_CASE("f_ball") {
  BallSpec spec{6, 2};
  CHECK(f_ball(BitVector(6), spec) == DecodeResult::of(BitVector(6)));
  BitVector w2 = BitVector::from_string("100100");
  CHECK(f_ball(w2, spec) == DecodeResult::of(w2));  // weight exactly r
  CHECK(f_ball(BitVector::from_string("110100"), spec).is_bottom());
}

TEST_CASE("g_ball decodes syndromes to the first matching ball element") {
  SUBCASE("injective hash reproduces f") {
    BitMatrix id = BitMatrix::identity(4);
    BallSpec spec{4, 2};
    for (std::uint64_t y = 0; y < 16; ++y) {
      BitVector yv = BitVector::from_index(y, 4);
      CHECK(g_ball(id, yv, spec) == f_ball(yv, spec));
    }
  }
  SUBCASE("zero syndrome decodes to the zero pattern") {
    Rng rng(5);
    BitMatrix h = BitMatrix::random(3, 8, rng);
    CHECK(g_ball(h, BitVector(3), {8, 2}) == DecodeResult::of(BitVector(8)));
  }
  SUBCASE("collision resolved by enumeration order") {
    // both 0100 and 1000 hit y; 0100 is enumerated first
    BitMatrix h = BitMatrix::from_strings({"1100", "0011"});
    DecodeResult d = g_ball(h, BitVector::from_string("10"), {4, 1});
    CHECK(d == DecodeResult::of(BitVector::from_string("0100")));
  }
  SUBCASE("unreachable syndrome gives bottom") {
    BitMatrix h = BitMatrix::from_strings({"1100", "0011"});
    CHECK(g_ball(h, BitVector::from_string("11"), {4, 0}).is_bottom());
  }
  SUBCASE("oversized balls are refused") {
    BitMatrix h = BitMatrix::zero(1, 128);
    CHECK_THROWS_AS(g_ball(h, BitVector(1), {128, 16}), BallTooLargeError);
  }
}

TEST_CASE("exhaustive failure bound for hash-then-decode at n=4, k=3, r=1") {
  BallSpec spec{4, 1};
  BigInt total = 0, failures = 0;
  for_each_full_rank(3, 4, [&](const BitMatrix& l) {
    for (std::uint64_t a = 0; a < 16; ++a) {
      BitVector alpha = BitVector::from_index(a, 4);
      ++total;
      if (g_ball(l, multiply(l, alpha), spec) != f_ball(alpha, spec)) ++failures;
    }
  });
  CHECK(total == 2520 * 16);
  double frac = static_cast<double>(BigRational(failures, total));
  double eps = static_cast<double>(BigRational(exact_collision_probability(3, 4)));
  CHECK(frac <= eps * static_cast<double>(ball_size(spec)));
  CHECK(frac < std::exp2(-3.0 + 4.0 * binary_entropy(0.25)));
}
