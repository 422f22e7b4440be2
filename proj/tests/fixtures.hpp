#pragma once

#include "ifs/analysis.hpp"
#include "ifs/coding.hpp"

#include <vector>

namespace fixtures {

using ifs::Rational;

inline Rational q(long num, long den = 1) { return Rational(num, den); }

inline ifs::ContractionSystem affine_system(const std::vector<std::pair<Rational, Rational>>& maps) {
  std::vector<ifs::ContractionMap> out;
  for (const auto& [a, b] : maps) out.push_back(ifs::ContractionMap::affine(a, b));
  return ifs::ContractionSystem::validate(std::move(out));
}

// Middle thirds.
inline ifs::ContractionSystem cantor() { return affine_system({{q(1, 3), q(0)}, {q(1, 3), q(2, 3)}}); }

// Quarter maps, the first two touching at 1/4.
inline ifs::ContractionSystem touching() {
  return affine_system({{q(1, 4), q(0)}, {q(1, 4), q(1, 4)}, {q(1, 4), q(3, 4)}});
}

// Interior images: 0^ = 1/4, 1^ = 7/8.
inline ifs::ContractionSystem shifted() {
  return affine_system({{q(1, 3), q(1, 6)}, {q(1, 3), q(7, 12)}});
}

inline ifs::ProbabilityVector p(std::vector<Rational> v) { return ifs::ProbabilityVector(std::move(v)); }

inline ifs::ProbabilityVector half() { return p({q(1, 2), q(1, 2)}); }
inline ifs::ProbabilityVector third() { return p({q(1, 3), q(2, 3)}); }
inline ifs::ProbabilityVector touching_p() { return p({q(1, 4), q(1, 4), q(1, 2)}); }

// x -> (x + x^2)/4, Lipschitz constant 3/4 on [0,1].
inline ifs::ContractionMap quadratic() {
  return ifs::ContractionMap::general([](double x) { return (x + x * x) / 4.0; }, 0.75, "(x+x^2)/4");
}

// A general system: the quadratic map next to x/3 + 2/3.
inline ifs::ContractionSystem mixed() {
  return ifs::ContractionSystem::validate(
      {quadratic(), ifs::ContractionMap::affine(q(1, 3), q(2, 3))});
}

}  // namespace fixtures
