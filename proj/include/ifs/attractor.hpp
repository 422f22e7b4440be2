#pragma once

// Level sets A_k, the gap decomposition of [0^,1^] minus the attractor,
// Lebesgue bounds and point location.

#include "ifs/contraction_system.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ifs {

template <class T>
struct Interval {
  T left{};
  T right{};

  T length() const { return right - left; }
  bool contains(const T& x) const { return left <= x && x <= right; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise disjoint closed intervals.
template <class T>
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Builds the set from intervals sorted by left endpoint, merging any
  /// that touch or overlap.
  static IntervalSet from_sorted(const std::vector<Interval<T>>& sorted) {
    IntervalSet set;
    for (const auto& iv : sorted) {
      if (!set.items_.empty() && iv.left <= set.items_.back().right) {
        if (iv.right > set.items_.back().right) set.items_.back().right = iv.right;
      } else {
        set.items_.push_back(iv);
      }
    }
    return set;
  }

  const std::vector<Interval<T>>& intervals() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  T total_length() const {
    T sum{0};
    for (const auto& iv : items_) sum += iv.length();
    return sum;
  }

  bool contains(const T& x) const {
    auto it = std::upper_bound(items_.begin(), items_.end(), x,
                               [](const T& v, const Interval<T>& iv) { return v < iv.left; });
    return it != items_.begin() && std::prev(it)->contains(x);
  }

  /// Every interval of *this lies inside a single interval of `outer`.
  bool subset_of(const IntervalSet& outer) const {
    std::size_t j = 0;
    for (const auto& iv : items_) {
      while (j < outer.items_.size() && outer.items_[j].right < iv.left) ++j;
      if (j == outer.items_.size()) return false;
      if (!(outer.items_[j].left <= iv.left && iv.right <= outer.items_[j].right)) return false;
    }
    return true;
  }

  /// True when the open interval (a, b) misses every interval of the set.
  bool disjoint_from_open(const T& a, const T& b) const {
    for (const auto& iv : items_)
      if (iv.left < b && a < iv.right) return false;
    return true;
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval<T>> items_;
};

/// A connected component (f_w(1^), f_{w+}(0^)) of [0^,1^] minus A_*, where
/// w = (n_1, ..., n_k) with n_k < N and w+ increments the last digit.
template <class T>
struct Gap {
  T left{};
  T right{};
  Word digits;

  std::size_t depth() const noexcept { return digits.size(); }
};

template <class T>
struct GapReport {
  Interval<T> left_flank;   // [0, 0^]
  Interval<T> right_flank;  // [1^, 1]
  std::vector<Gap<T>> gaps;
};

namespace detail {

inline std::size_t checked_power(std::size_t base, std::size_t k, std::size_t cap) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (count > cap / base)
      throw error(errc::depth_too_large,
                  "depth " + std::to_string(k) + " exceeds the interval cap " + std::to_string(cap));
    count *= base;
  }
  if (count > cap)
    throw error(errc::depth_too_large,
                "depth " + std::to_string(k) + " exceeds the interval cap " + std::to_string(cap));
  return count;
}

// Digits of the index-th word of length k in lexicographic order.
inline Word word_at(std::size_t index, std::size_t k, std::size_t base) {
  Word w(k);
  for (std::size_t i = k; i-- > 0;) {
    w[i] = static_cast<Digit>(index % base);
    index /= base;
  }
  return w;
}

}  // namespace detail

/// The (N+1)^k intervals [f_w(0), f_w(1)] for |w| = k, unmerged and in
/// lexicographic order of w (which is also their geometric order).
template <class T = double>
std::vector<Interval<T>> cylinders(const ContractionSystem& sys, std::size_t k,
                                   std::size_t cap = kDefaultIntervalCap) {
  if constexpr (is_exact_v<T>) sys.require_exact();
  detail::checked_power(sys.size(), k, cap);
  std::vector<Interval<T>> level{{T(0), T(1)}};
  for (std::size_t depth = 0; depth < k; ++depth) {
    std::vector<Interval<T>> next;
    next.reserve(level.size() * sys.size());
    for (Digit n = 0; n < sys.size(); ++n)
      for (const auto& iv : level) next.push_back({sys.apply(n, iv.left), sys.apply(n, iv.right)});
    level = std::move(next);
  }
  return level;
}

/// A_k with touching cylinders merged.
template <class T = double>
IntervalSet<T> level_set(const ContractionSystem& sys, std::size_t k,
                         std::size_t cap = kDefaultIntervalCap) {
  return IntervalSet<T>::from_sorted(cylinders<T>(sys, k, cap));
}

/// Gaps of depth 1..max_depth in lexicographic order of their digits, with
/// degenerate (touching) candidates omitted, plus the two flanks.
template <class T = double>
GapReport<T> gaps(const ContractionSystem& sys, std::size_t max_depth,
                  std::size_t cap = kDefaultIntervalCap) {
  if (max_depth < 1) throw error(errc::domain_error, "max_depth must be >= 1");
  detail::checked_power(sys.size(), max_depth - 1, cap);
  const T zero_hat = sys.zero_hat_as<T>();
  const T one_hat = sys.one_hat_as<T>();
  const double tol = sys.tolerances().fix;

  GapReport<T> report;
  report.left_flank = {T(0), zero_hat};
  report.right_flank = {one_hat, T(1)};
  const std::size_t base = sys.size();
  std::size_t prefixes = 1;
  for (std::size_t k = 1; k <= max_depth; ++k) {
    for (std::size_t index = 0; index < prefixes; ++index) {
      Word w = detail::word_at(index, k - 1, base);
      w.push_back(0);
      for (Digit n = 0; n < sys.max_digit(); ++n) {
        w.back() = n;
        T left = sys.apply_word<T>(w, one_hat);
        w.back() = n + 1;
        T right = sys.apply_word<T>(w, zero_hat);
        w.back() = n;
        if (!(right > left) || near(left, right, tol)) continue;
        report.gaps.push_back({std::move(left), std::move(right), w});
      }
    }
    prefixes *= base;
  }
  return report;
}

/// Total length of A_k. Affine systems use the closed form (sum of
/// slopes)^k; general systems sum the level-set intervals.
inline double measure_bound(const ContractionSystem& sys, std::size_t k) {
  if (sys.exact()) {
    Rational total = 1 - *sys.first_level_gap();
    Rational power = 1;
    for (std::size_t i = 0; i < k; ++i) power *= total;
    return to_double(power);
  }
  return level_set<double>(sys, k).total_length();
}

inline Rational measure_bound_exact(const ContractionSystem& sys, std::size_t k) {
  sys.require_exact();
  Rational total = 1 - *sys.first_level_gap();
  Rational power = 1;
  for (std::size_t i = 0; i < k; ++i) power *= total;
  return power;
}

// ---------------------------------------------------------------------------
// Point location.

enum class Side { left, right };

struct InFlank {
  Side side;
};

template <class T>
struct InGap {
  Gap<T> gap;
};

enum class Tail { constant0, constant_n, truncated };

/// Digits of a point; a constant tail makes it an exact point of A_*,
/// a truncated one names the cylinder f_prefix([0^,1^]).
struct Address {
  Word prefix;
  Tail tail = Tail::truncated;

  bool exact() const noexcept { return tail != Tail::truncated; }
  friend bool operator==(const Address&, const Address&) = default;
};

/// x is an exactly located point of A_* that is not a gap endpoint.
struct InAttractorCylinder {
  Address address;
};

/// The search depth ran out before x was resolved.
struct Undecided {
  Word digits;
};

template <class T = double>
using Verdict = std::variant<InFlank, InGap<T>, InAttractorCylinder, Undecided>;

namespace detail {

// Walks x down the coding tree with the max tie-break. `keep_going(digits)`
// is consulted after each digit. Residual points equal to 0^ or 1^ end the
// walk at the gap that has x as an endpoint, or at an exact address when
// that gap is degenerate.
template <class T, class Continue>
Verdict<T> walk(const ContractionSystem& sys, const T& x, Continue&& keep_going) {
  if (x < T(0) || x > T(1)) throw error(errc::domain_error, "x outside [0,1]");
  const double tol = sys.tolerances().fix;
  const T zero_hat = sys.zero_hat_as<T>();
  const T one_hat = sys.one_hat_as<T>();
  if (x <= zero_hat) return InFlank{Side::left};
  if (x >= one_hat) return InFlank{Side::right};

  // Images of the hull [0^, 1^] under each first-level map.
  std::vector<T> lo(sys.size()), hi(sys.size());
  for (Digit n = 0; n < sys.size(); ++n) {
    lo[n] = sys.apply(n, zero_hat);
    hi[n] = sys.apply(n, one_hat);
  }

  Word digits;
  T y = x;
  for (;;) {
    Digit n = sys.max_digit();
    while (n > 0 && y < lo[n] && !near(y, lo[n], tol)) --n;
    if (y > hi[n] && !near(y, hi[n], tol)) {
      // Strictly inside the gap between images n and n+1.
      digits.push_back(n);
      T left = sys.apply_word<T>(digits, one_hat);
      digits.back() = n + 1;
      T right = sys.apply_word<T>(digits, zero_hat);
      digits.back() = n;
      return InGap<T>{Gap<T>{std::move(left), std::move(right), std::move(digits)}};
    }
    digits.push_back(n);
    y = sys.inverse(n, y);

    if (near(y, zero_hat, tol) || y <= zero_hat) {
      // x = f_w(0^): right endpoint of the gap left of it, found by
      // stripping trailing zeros and decrementing.
      Word w = digits;
      while (!w.empty() && w.back() == 0) w.pop_back();
      if (w.empty()) return InFlank{Side::left};
      --w.back();
      if (sys.touching(w.back()) && near(zero_hat, T(0), tol) && near(one_hat, T(1), tol))
        return InAttractorCylinder{Address{std::move(digits), Tail::constant0}};
      T left = sys.apply_word<T>(w, one_hat);
      ++w.back();
      T right = sys.apply_word<T>(w, zero_hat);
      --w.back();
      return InGap<T>{Gap<T>{std::move(left), std::move(right), std::move(w)}};
    }
    if (near(y, one_hat, tol) || y >= one_hat) {
      Word w = digits;
      while (!w.empty() && w.back() == sys.max_digit()) w.pop_back();
      if (w.empty()) return InFlank{Side::right};
      if (sys.touching(w.back()) && near(zero_hat, T(0), tol) && near(one_hat, T(1), tol)) {
        // Report the twin address that does not end in N_b followed by N's.
        ++w.back();
        return InAttractorCylinder{Address{std::move(w), Tail::constant0}};
      }
      T left = sys.apply_word<T>(w, one_hat);
      ++w.back();
      T right = sys.apply_word<T>(w, zero_hat);
      --w.back();
      return InGap<T>{Gap<T>{std::move(left), std::move(right), std::move(w)}};
    }
    if (!keep_going(digits)) return Undecided{std::move(digits)};
  }
}

}  // namespace detail

/// Classifies x: in a flank, in (the closure of) an enumerated gap, an
/// exactly coded attractor point, or Undecided after max_depth digits.
/// Affine systems run in exact arithmetic on the rational value of x.
inline Verdict<double> locate(const ContractionSystem& sys, double x, std::size_t max_depth) {
  if (!(x >= 0.0 && x <= 1.0)) throw error(errc::domain_error, "x outside [0,1]");
  auto keep_going = [max_depth](const Word& w) { return w.size() < max_depth; };
  if (max_depth == 0) {
    if (x <= sys.zero_hat()) return InFlank{Side::left};
    if (x >= sys.one_hat()) return InFlank{Side::right};
    return Undecided{};
  }
  if (!sys.exact()) return detail::walk<double>(sys, x, keep_going);
  auto v = detail::walk<Rational>(sys, to_rational(x), keep_going);
  if (auto* g = std::get_if<InGap<Rational>>(&v))
    return InGap<double>{Gap<double>{to_double(g->gap.left), to_double(g->gap.right),
                                     std::move(g->gap.digits)}};
  if (auto* f = std::get_if<InFlank>(&v)) return *f;
  if (auto* a = std::get_if<InAttractorCylinder>(&v)) return *a;
  return std::get<Undecided>(v);
}

/// Exact classification of a rational point of an affine system.
inline Verdict<Rational> locate(const ContractionSystem& sys, const Rational& x, std::size_t max_depth) {
  sys.require_exact();
  if (x < 0 || x > 1) throw error(errc::domain_error, "x outside [0,1]");
  if (max_depth == 0) {
    if (x <= sys.zero_hat_as<Rational>()) return InFlank{Side::left};
    if (x >= sys.one_hat_as<Rational>()) return InFlank{Side::right};
    return Undecided{};
  }
  return detail::walk<Rational>(sys, x, [max_depth](const Word& w) { return w.size() < max_depth; });
}

/// Witness that A_* is perfect: flips digit m of the (exact-tailed) address
/// of x, with m minimal such that L^(m-1) < epsilon, and returns the
/// resulting point y != x with |x - y| < epsilon.
struct PerfectnessWitness {
  std::size_t flipped_position = 0;  // m, 1-based
  Address flipped;
  double point = 0.0;
};

inline PerfectnessWitness perfectness_probe(const ContractionSystem& sys, const Address& x,
                                            double epsilon) {
  if (!(epsilon > 0.0)) throw error(errc::domain_error, "epsilon must be positive");
  if (!x.exact()) throw error(errc::domain_error, "perfectness probe needs an exact tail");
  sys.check_digits(x.prefix);
  const double lip = sys.lipschitz();
  std::size_t m = 1;
  double power = 1.0;  // L^(m-1)
  while (!(power < epsilon)) {
    power *= lip;
    ++m;
  }
  // Expand the tail so that digit m is explicit.
  Word digits = x.prefix;
  const Digit tail_digit = x.tail == Tail::constant0 ? 0 : sys.max_digit();
  while (digits.size() < m) digits.push_back(tail_digit);
  digits[m - 1] = static_cast<Digit>((digits[m - 1] + 1) % sys.size());

  PerfectnessWitness out;
  out.flipped_position = m;
  out.flipped = Address{digits, x.tail};
  if (sys.exact()) {
    const Rational end = x.tail == Tail::constant0 ? sys.zero_hat_as<Rational>()
                                                   : sys.one_hat_as<Rational>();
    out.point = to_double(sys.apply_word<Rational>(digits, end));
  } else {
    const double end = x.tail == Tail::constant0 ? sys.zero_hat() : sys.one_hat();
    out.point = sys.apply_word<double>(digits, end);
  }
  return out;
}

}  // namespace ifs
