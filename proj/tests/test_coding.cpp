#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ifs;
using fixtures::q;

namespace {

Address random_address(const ContractionSystem& sys, std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<Digit> digit(0, sys.max_digit());
  Address a;
  a.prefix.resize(len(rng));
  for (auto& d : a.prefix) d = digit(rng);
  a.tail = (rng() & 1U) ? Tail::constant_n : Tail::constant0;
  return a;
}

// Removes prefix digits that merely repeat the tail.
Address trimmed(const ContractionSystem& sys, Address a) {
  const Digit t = a.tail == Tail::constant0 ? 0 : sys.max_digit();
  while (!a.prefix.empty() && a.prefix.back() == t) a.prefix.pop_back();
  return a;
}

bool in_zb(const ContractionSystem& sys, const Address& a) {
  return !(canonicalize(sys, a) == a);
}

}  // namespace

TEST(AddressText, RoundTrip) {
  const Address a{{0, 1, 0, 1}, Tail::truncated};
  EXPECT_EQ(to_string(a), "0.1.0.1^?");
  EXPECT_EQ(parse_address("0.1.0.1^?"), a);
  EXPECT_EQ(to_string(Address{{}, Tail::constant0}), "^0");
  EXPECT_EQ(parse_address("^N"), (Address{{}, Tail::constant_n}));
  EXPECT_EQ(parse_address("2.0^N"), (Address{{2, 0}, Tail::constant_n}));
  EXPECT_THROW(parse_address("0.1"), error);
  EXPECT_THROW(parse_address("0..1^0"), error);
  EXPECT_THROW(parse_address("0.x^0"), error);
  EXPECT_THROW(parse_address("0.1.^0"), error);
}

TEST(Transfer, Examples) {
  const auto [n1, y1] = transfer(fixtures::cantor(), 0.25);
  EXPECT_EQ(n1, 0u);
  EXPECT_DOUBLE_EQ(y1, 0.75);
  const auto [n2, y2] = transfer(fixtures::touching(), 0.25);
  EXPECT_EQ(n2, 1u);
  EXPECT_EQ(y2, 0.0);
  try {
    transfer(fixtures::cantor(), 0.5);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::not_in_attractor);
  }
}

TEST(Transfer, GeneralSystem) {
  const auto sys = fixtures::mixed();
  const double x = 0.7;
  const double y = sys.map(0)(x);
  const auto [n, back] = transfer(sys, y);
  EXPECT_EQ(n, 0u);
  EXPECT_NEAR(back, x, 1e-12);
  EXPECT_THROW(transfer(sys, 0.6), error);
}

TEST(ExtractAddress, Examples) {
  const auto sc = fixtures::cantor();
  const auto a = extract_address(sc, 0.25, 12);
  EXPECT_EQ(a.tail, Tail::truncated);
  EXPECT_EQ(a.prefix, (Word{0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1}));
  EXPECT_EQ(extract_address<Rational>(sc, q(1, 4), 12).prefix, a.prefix);
  EXPECT_EQ(extract_address<Rational>(sc, q(2, 3), 12), (Address{{1}, Tail::constant0}));
  EXPECT_EQ(extract_address<Rational>(fixtures::touching(), q(1, 4), 12), (Address{{1}, Tail::constant0}));
  EXPECT_EQ(extract_address<Rational>(fixtures::shifted(), q(1, 4), 12), (Address{{}, Tail::constant0}));
  EXPECT_EQ(extract_address<Rational>(fixtures::shifted(), q(7, 8), 12), (Address{{}, Tail::constant_n}));
  EXPECT_THROW(extract_address(sc, 0.5, 5), error);
}

TEST(ExtractAddress, PointLiesInItsCylinder) {
  const auto sys = fixtures::shifted();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Address a = random_address(sys, rng, 10);
    const Rational x = pi_exact_tail<Rational>(sys, a);
    const Address b = extract_address<Rational>(sys, x, 6);
    EXPECT_LE(sys.apply_word<Rational>(b.prefix, Rational(0)), x);
    EXPECT_GE(sys.apply_word<Rational>(b.prefix, Rational(1)), x);
  }
}

TEST(Pi, Examples) {
  const auto sc = fixtures::cantor();
  EXPECT_EQ(pi(sc, Address{{1}, Tail::constant0}).value, 2.0 / 3.0);
  EXPECT_EQ(pi(sc, Address{{1}, Tail::constant0}).error, 0.0);
  const auto e = pi(sc, Address{{0, 1, 0, 1, 0, 1, 0, 1}, Tail::truncated});
  EXPECT_NEAR(e.value, 0.25, std::pow(1.0 / 3.0, 8) / 2);
  EXPECT_NEAR(e.error, std::pow(1.0 / 3.0, 8) / 2, 1e-18);
  EXPECT_LE(std::abs(e.value - 0.25), e.error);
  EXPECT_EQ(pi(fixtures::touching(), Address{{0}, Tail::constant_n}).value, 0.25);
  EXPECT_EQ(pi_exact_tail<Rational>(fixtures::shifted(), Address{{0}, Tail::constant_n}),
            q(1, 6) + q(7, 24));
}

TEST(Shift, Examples) {
  EXPECT_EQ(shift(Address{{0, 1, 0, 1}, Tail::constant_n}), (Address{{1, 0, 1}, Tail::constant_n}));
  EXPECT_EQ(shift(Address{{}, Tail::constant0}), (Address{{}, Tail::constant0}));
  EXPECT_EQ(shift(Address{{2}, Tail::constant_n}), (Address{{}, Tail::constant_n}));
  EXPECT_EQ(shift(Address{{2, 1}, Tail::truncated}), (Address{{1}, Tail::truncated}));
  try {
    shift(Address{{}, Tail::truncated});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::empty_truncated);
  }
}

TEST(Ambiguity, Examples) {
  const auto c = ambiguity(fixtures::cantor());
  EXPECT_TRUE(c.nb.empty());
  EXPECT_FALSE(c.zb_active);
  const auto t = ambiguity(fixtures::touching());
  EXPECT_EQ(t.nb, std::vector<Digit>{0});
  EXPECT_TRUE(t.zb_active);
  const auto f = ambiguity(fixtures::shifted());
  EXPECT_TRUE(f.nb.empty());
  EXPECT_FALSE(f.zb_active);
}

TEST(Ambiguity, TouchingButNotPinned) {
  // f_0(1) = f_1(0) but f_0(0) > 0: N_b is non-empty, the condition fails.
  const auto sys = fixtures::affine_system({{q(1, 4), q(1, 8)}, {q(1, 4), q(3, 8)}, {q(1, 4), q(3, 4)}});
  const auto t = ambiguity(sys);
  EXPECT_EQ(t.nb, std::vector<Digit>{0});
  EXPECT_FALSE(t.zb_active);
  EXPECT_EQ(canonicalize(sys, Address{{0}, Tail::constant_n}), (Address{{0}, Tail::constant_n}));
}

TEST(Canonicalize, Examples) {
  const auto st = fixtures::touching();
  const Address twin{{0}, Tail::constant_n};
  const Address canon = canonicalize(st, twin);
  EXPECT_EQ(canon, (Address{{1}, Tail::constant0}));
  EXPECT_EQ(pi_exact_tail<Rational>(st, twin), q(1, 4));
  EXPECT_EQ(pi_exact_tail<Rational>(st, canon), q(1, 4));
  EXPECT_EQ(canonicalize(fixtures::cantor(), twin), twin);
  EXPECT_EQ(canonicalize(st, Address{{2, 0}, Tail::constant_n}), (Address{{2, 1}, Tail::constant0}));
  EXPECT_EQ(canonicalize(st, Address{{0, 2, 2}, Tail::constant_n}), (Address{{1}, Tail::constant0}));
  EXPECT_EQ(canonicalize(st, Address{{1}, Tail::constant_n}), (Address{{1}, Tail::constant_n}));
}

TEST(Canonicalize, PreservesPointAndFixesNonZb) {
  const auto st = fixtures::touching();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const Address a = random_address(st, rng, 8);
    const Address c = canonicalize(st, a);
    EXPECT_EQ(pi_exact_tail<Rational>(st, a), pi_exact_tail<Rational>(st, c));
    EXPECT_EQ(canonicalize(st, c), c);
    // Without an N_b digit right before the all-N tail, nothing changes.
    const Address t = trimmed(st, a);
    if (a.tail == Tail::constant0 || t.prefix.empty() || t.prefix.back() != 0) EXPECT_EQ(c, a);
  }
}

TEST(RoundTrip, ExtractInvertsPi) {
  std::mt19937_64 rng(17);
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    for (int i = 0; i < 200; ++i) {
      const Address a = random_address(sys, rng, 10);
      const Rational x = pi_exact_tail<Rational>(sys, a);
      const Address back = extract_address<Rational>(sys, x, 64);
      EXPECT_TRUE(back.exact());
      EXPECT_EQ(trimmed(sys, back), trimmed(sys, canonicalize(sys, a))) << to_string(a);
    }
  }
}

TEST(RoundTrip, OrderCompatible) {
  std::mt19937_64 rng(23);
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    for (int i = 0; i < 300; ++i) {
      Address a = random_address(sys, rng, 6);
      Address b = random_address(sys, rng, 6);
      if (in_zb(sys, a) || in_zb(sys, b)) continue;
      // Compare the infinite digit streams.
      const std::size_t len = 8;
      auto stream = [&](const Address& x) {
        Word w = x.prefix;
        while (w.size() < len) w.push_back(x.tail == Tail::constant0 ? 0 : sys.max_digit());
        return w;
      };
      if (stream(a) > stream(b)) std::swap(a, b);
      EXPECT_LE(pi_exact_tail<Rational>(sys, a), pi_exact_tail<Rational>(sys, b));
    }
  }
}

TEST(Transfer, LeftInverseOfPrepend) {
  std::mt19937_64 rng(29);
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    for (int i = 0; i < 100; ++i) {
      const Address a = random_address(sys, rng, 8);
      const Rational x = pi_exact_tail<Rational>(sys, a);
      for (Digit n = 0; n < sys.size(); ++n) {
        const Rational y = sys.apply(n, x);
        if (!(y > sys.apply(n, sys.zero_hat_as<Rational>()) && y < sys.apply(n, sys.one_hat_as<Rational>())))
          continue;
        const auto [digit, image] = transfer<Rational>(sys, y, 0.0);
        EXPECT_EQ(digit, n);
        EXPECT_EQ(image, x);
      }
    }
  }
}

TEST(Commute, Examples) {
  const auto sc = fixtures::cantor();
  EXPECT_LT(commute_check(sc, Address{{0, 1, 0, 1, 0, 1}, Tail::constant_n}, 3), 1e-10);
  EXPECT_EQ(commute_check(sc, Address{{}, Tail::constant0}, 5), 0.0);
  EXPECT_LT(commute_check(fixtures::touching(), Address{{1}, Tail::constant0}, 2), 1e-10);
}

TEST(Commute, RandomNonZbAddresses) {
  std::mt19937_64 rng(31);
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    for (int i = 0; i < 100; ++i) {
      const Address a = canonicalize(sys, random_address(sys, rng, 12));
      EXPECT_LT(commute_check(sys, a, 10), 10 * sys.tolerances().inv) << to_string(a);
    }
  }
}

TEST(Commute, GeneralSystem) {
  const auto sys = fixtures::mixed();
  std::mt19937_64 rng(37);
  for (int i = 0; i < 50; ++i) {
    const Address a = random_address(sys, rng, 6);
    EXPECT_LT(commute_check(sys, a, 6), 1e-9) << to_string(a);
  }
}

TEST(Commute, RejectsTruncated) {
  EXPECT_THROW(commute_check(fixtures::cantor(), Address{{0}, Tail::truncated}, 2), error);
}
