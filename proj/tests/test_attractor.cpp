#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ifs;
using fixtures::q;

namespace {

oracle::Brute brute(const ContractionSystem& sys) {
  oracle::Brute b;
  for (const auto& f : sys.maps()) b.maps.push_back({f.slope(), f.intercept()});
  return b;
}

std::vector<std::pair<Rational, Rational>> as_pairs(const IntervalSet<Rational>& set) {
  std::vector<std::pair<Rational, Rational>> out;
  for (const auto& iv : set.intervals()) out.emplace_back(iv.left, iv.right);
  return out;
}

}  // namespace

TEST(LevelSet, CantorLevels) {
  const auto sys = fixtures::cantor();
  const auto a1 = level_set<Rational>(sys, 1);
  EXPECT_EQ(as_pairs(a1), (std::vector<std::pair<Rational, Rational>>{{0, q(1, 3)}, {q(2, 3), 1}}));
  EXPECT_EQ(a1.total_length(), q(2, 3));
  const auto a2 = level_set<Rational>(sys, 2);
  EXPECT_EQ(as_pairs(a2), (std::vector<std::pair<Rational, Rational>>{
                              {0, q(1, 9)}, {q(2, 9), q(1, 3)}, {q(2, 3), q(7, 9)}, {q(8, 9), 1}}));
  EXPECT_EQ(a2.total_length(), q(4, 9));
}

TEST(LevelSet, DepthZeroIsUnitInterval) {
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    const auto a0 = level_set<Rational>(sys, 0);
    ASSERT_EQ(a0.size(), 1u);
    EXPECT_EQ(a0.intervals()[0].left, 0);
    EXPECT_EQ(a0.intervals()[0].right, 1);
  }
}

TEST(LevelSet, TouchingCylindersMerge) {
  const auto a1 = level_set<Rational>(fixtures::touching(), 1);
  EXPECT_EQ(as_pairs(a1), (std::vector<std::pair<Rational, Rational>>{{0, q(1, 2)}, {q(3, 4), 1}}));
  EXPECT_EQ(cylinders<Rational>(fixtures::touching(), 1).size(), 3u);
}

TEST(LevelSet, MatchesBruteForce) {
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    const auto b = brute(sys);
    for (std::size_t k = 0; k <= 6; ++k) {
      const auto mine = level_set<Rational>(sys, k);
      EXPECT_EQ(as_pairs(mine), b.level_set(k)) << "k = " << k;
      EXPECT_EQ(mine.total_length(), oracle::Brute::total_length(b.level_set(k)));
    }
  }
}

TEST(LevelSet, DepthTooLarge) {
  EXPECT_THROW(level_set<double>(fixtures::cantor(), 21), error);
  try {
    level_set<double>(fixtures::cantor(), 30);
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::depth_too_large);
  }
  EXPECT_NO_THROW(level_set<double>(fixtures::cantor(), 20));
}

TEST(Gaps, CantorDepthTwo) {
  const auto report = gaps<Rational>(fixtures::cantor(), 2);
  ASSERT_EQ(report.gaps.size(), 3u);
  EXPECT_EQ(report.gaps[0].left, q(1, 3));
  EXPECT_EQ(report.gaps[0].right, q(2, 3));
  EXPECT_EQ(report.gaps[0].digits, Word{0});
  EXPECT_EQ(report.gaps[1].left, q(1, 9));
  EXPECT_EQ(report.gaps[1].right, q(2, 9));
  EXPECT_EQ(report.gaps[2].left, q(7, 9));
  EXPECT_EQ(report.gaps[2].right, q(8, 9));
  EXPECT_EQ(report.gaps[2].digits, (Word{1, 0}));
  EXPECT_EQ(report.left_flank.right - report.left_flank.left, 0);
  EXPECT_EQ(report.right_flank.right - report.right_flank.left, 0);
}

TEST(Gaps, ShiftedDepthOne) {
  const auto report = gaps<Rational>(fixtures::shifted(), 1);
  EXPECT_EQ(report.left_flank.left, 0);
  EXPECT_EQ(report.left_flank.right, q(1, 4));
  EXPECT_EQ(report.right_flank.left, q(7, 8));
  EXPECT_EQ(report.right_flank.right, 1);
  ASSERT_EQ(report.gaps.size(), 1u);
  EXPECT_EQ(report.gaps[0].left, q(11, 24));
  EXPECT_EQ(report.gaps[0].right, q(2, 3));
}

TEST(Gaps, TouchingCandidateOmitted) {
  const auto report = gaps<Rational>(fixtures::touching(), 1);
  ASSERT_EQ(report.gaps.size(), 1u);
  EXPECT_EQ(report.gaps[0].left, q(1, 2));
  EXPECT_EQ(report.gaps[0].right, q(3, 4));
  EXPECT_EQ(report.gaps[0].digits, Word{1});
}

TEST(Gaps, ClosedFormCantorThroughDepthThree) {
  // Depth-k gaps of the middle-thirds set: (3m+1, 3m+2) / 3^k for every
  // m whose base-3 digits avoid 1.
  std::vector<std::pair<Rational, Rational>> expected;
  for (int k = 1; k <= 3; ++k) {
    const int scale = static_cast<int>(std::pow(3, k - 1));
    for (int m = 0; m < scale; ++m) {
      bool ok = true;
      for (int t = m; t > 0; t /= 3) ok = ok && t % 3 != 1;
      if (ok) expected.emplace_back(q(3 * m + 1, 3 * scale), q(3 * m + 2, 3 * scale));
    }
  }
  const auto report = gaps<Rational>(fixtures::cantor(), 3);
  ASSERT_EQ(report.gaps.size(), 7u);
  std::vector<std::pair<Rational, Rational>> mine;
  for (const auto& g : report.gaps) mine.emplace_back(g.left, g.right);
  std::sort(mine.begin(), mine.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(mine, expected);
}

TEST(Gaps, DisjointAndOutsideLevelSets) {
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    const auto report = gaps<Rational>(sys, 5);
    for (std::size_t i = 0; i < report.gaps.size(); ++i) {
      const auto& g = report.gaps[i];
      EXPECT_LT(g.left, g.right);
      for (std::size_t j = 0; j < i; ++j)
        EXPECT_TRUE(report.gaps[j].right <= g.left || g.right <= report.gaps[j].left);
      // The attractor lies in the depth-k hulls, which avoid every gap of depth <= k.
      for (std::size_t k = g.depth(); k <= 6; ++k) {
        bool clear = true;
        for (const auto& c : cylinders<Rational>(sys, k)) {
          const Rational lo = c.left + (c.right - c.left) * sys.zero_hat_as<Rational>();
          const Rational hi = c.left + (c.right - c.left) * sys.one_hat_as<Rational>();
          clear = clear && (hi <= g.left || lo >= g.right);
        }
        EXPECT_TRUE(clear) << "gap " << word_to_string(g.digits) << " at depth " << k;
      }
    }
  }
}

TEST(Gaps, DecompositionIsExact) {
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    for (std::size_t depth = 1; depth <= 6; ++depth) {
      Rational total = 0;
      for (const auto& g : gaps<Rational>(sys, depth).gaps) total += g.right - g.left;
      const Rational span = sys.one_hat_as<Rational>() - sys.zero_hat_as<Rational>();
      // Every depth-k hull is an affine image of [0^,1^] with the cylinder's slope.
      Rational hulls = 0;
      for (const auto& c : cylinders<Rational>(sys, depth)) hulls += (c.right - c.left) * span;
      EXPECT_EQ(hulls + total, span);
    }
  }
}

TEST(MeasureBound, Examples) {
  EXPECT_EQ(measure_bound_exact(fixtures::cantor(), 3), q(8, 27));
  EXPECT_EQ(measure_bound_exact(fixtures::cantor(), 0), 1);
  EXPECT_EQ(measure_bound_exact(fixtures::touching(), 2), q(9, 16));
  EXPECT_DOUBLE_EQ(measure_bound(fixtures::cantor(), 3), 8.0 / 27.0);
  // Cross-check against summing the 8 interval lengths.
  Rational sum = 0;
  for (const auto& c : cylinders<Rational>(fixtures::cantor(), 3)) sum += c.right - c.left;
  EXPECT_EQ(sum, q(8, 27));
}

TEST(MeasureBound, GeneralSystemDecreases) {
  const auto sys = fixtures::mixed();
  double prev = 1.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double m = measure_bound(sys, k);
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(Nesting, StrictForTenLevels) {
  for (const auto& sys : {fixtures::cantor(), fixtures::touching(), fixtures::shifted()}) {
    auto prev = level_set<Rational>(sys, 0);
    for (std::size_t k = 1; k <= 10; ++k) {
      auto cur = level_set<Rational>(sys, k);
      EXPECT_TRUE(cur.subset_of(prev));
      EXPECT_LT(cur.total_length(), prev.total_length());
      prev = std::move(cur);
    }
  }
}

TEST(Locate, Examples) {
  const auto sc = fixtures::cantor();
  const auto v1 = locate(sc, 0.5, 1);
  ASSERT_TRUE(std::holds_alternative<InGap<double>>(v1));
  EXPECT_EQ(std::get<InGap<double>>(v1).gap.digits, Word{0});
  EXPECT_DOUBLE_EQ(std::get<InGap<double>>(v1).gap.left, 1.0 / 3.0);

  const auto v2 = locate(sc, 0.25, 8);
  ASSERT_TRUE(std::holds_alternative<Undecided>(v2));
  EXPECT_EQ(std::get<Undecided>(v2).digits, (Word{0, 1, 0, 1, 0, 1, 0, 1}));

  const auto v3 = locate(fixtures::shifted(), 0.1, 10);
  ASSERT_TRUE(std::holds_alternative<InFlank>(v3));
  EXPECT_EQ(std::get<InFlank>(v3).side, Side::left);
  const auto v4 = locate(fixtures::shifted(), 0.9, 10);
  EXPECT_EQ(std::get<InFlank>(v4).side, Side::right);
}

TEST(Locate, ExactRationalPoints) {
  const auto sc = fixtures::cantor();
  const auto v = locate(sc, q(1, 3), 20);
  ASSERT_TRUE(std::holds_alternative<InGap<Rational>>(v));
  EXPECT_EQ(std::get<InGap<Rational>>(v).gap.digits, Word{0});
  const auto w = locate(sc, q(7, 9), 20);
  ASSERT_TRUE(std::holds_alternative<InGap<Rational>>(w));
  EXPECT_EQ(std::get<InGap<Rational>>(w).gap.digits, (Word{1, 0}));
  const auto t = locate(fixtures::touching(), q(1, 4), 20);
  ASSERT_TRUE(std::holds_alternative<InAttractorCylinder>(t));
  EXPECT_EQ(std::get<InAttractorCylinder>(t).address, (Address{{1}, Tail::constant0}));
}

TEST(Locate, DomainError) {
  EXPECT_THROW(locate(fixtures::cantor(), 1.5, 3), error);
  EXPECT_THROW(locate(fixtures::cantor(), -0.1, 3), error);
}

TEST(Locate, GapsFoundAtTheirMidpoints) {
  const auto sys = fixtures::shifted();
  for (const auto& g : gaps<Rational>(sys, 4).gaps) {
    const auto v = locate(sys, (g.left + g.right) / 2, 10);
    ASSERT_TRUE(std::holds_alternative<InGap<Rational>>(v));
    EXPECT_EQ(std::get<InGap<Rational>>(v).gap.digits, g.digits);
  }
}

TEST(Perfectness, Examples) {
  const auto sc = fixtures::cantor();
  const auto w1 = perfectness_probe(sc, Address{{}, Tail::constant0}, 0.05);
  EXPECT_EQ(w1.flipped_position, 4u);
  EXPECT_DOUBLE_EQ(w1.point, 2.0 / 81.0);
  EXPECT_LT(w1.point, 0.05);

  const auto w2 = perfectness_probe(sc, Address{{}, Tail::constant_n}, 0.5);
  EXPECT_EQ(w2.flipped_position, 2u);
  EXPECT_DOUBLE_EQ(w2.point, 7.0 / 9.0);

  const auto w3 = perfectness_probe(fixtures::touching(), Address{{}, Tail::constant0}, 0.3);
  EXPECT_EQ(w3.flipped_position, 2u);
  EXPECT_DOUBLE_EQ(w3.point, 1.0 / 16.0);
}

TEST(Perfectness, WitnessIsCloseAndDistinct) {
  const auto sys = fixtures::shifted();
  const Address x{{1, 0, 1}, Tail::constant0};
  const double px = to_double(sys.apply_word<Rational>(x.prefix, sys.zero_hat_as<Rational>()));
  for (double eps : {0.5, 0.1, 1e-3, 1e-6}) {
    const auto w = perfectness_probe(sys, x, eps);
    EXPECT_NE(w.point, px);
    EXPECT_LT(std::abs(w.point - px), eps);
  }
}
