#pragma once

// The invariant measure mu, known only through cylinder masses, bracketed
// interval masses and i.i.d. sampling of addresses.

#include "ifs/coding.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ifs {

/// Positive weights p_0..p_N summing to one. Exact when built from
/// rationals (or doubles) whose exact sum is 1.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<Rational> p) {
    if (p.size() < 2) throw error(errc::bad_probability, "need at least two weights");
    Rational sum = 0;
    for (const auto& v : p) {
      if (v <= 0) throw error(errc::bad_probability, "weights must be positive");
      sum += v;
    }
    if (sum != 1) throw error(errc::bad_probability, "weights sum to " + ifs::to_string(sum) + ", not 1");
    exact_ = std::move(p);
    for (const auto& v : exact_) values_.push_back(to_double(v));
    finish();
  }

  explicit ProbabilityVector(std::vector<double> p) : values_(std::move(p)) {
    if (values_.size() < 2) throw error(errc::bad_probability, "need at least two weights");
    double sum = 0.0;
    Rational exact_sum = 0;
    for (double v : values_) {
      if (!(v > 0.0) || !std::isfinite(v)) throw error(errc::bad_probability, "weights must be positive");
      sum += v;
      exact_sum += to_rational(v);
    }
    if (std::abs(sum - 1.0) > 1e-15)
      throw error(errc::bad_probability, "weights sum to " + std::to_string(sum) + ", not 1");
    if (exact_sum == 1)
      for (double v : values_) exact_.push_back(to_rational(v));
    finish();
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](Digit n) const { return values_.at(n); }
  const std::vector<double>& values() const noexcept { return values_; }
  bool exact() const noexcept { return !exact_.empty(); }
  double max() const noexcept { return max_; }

  template <class M>
  M at(Digit n) const {
    if constexpr (is_exact_v<M>) {
      require_exact();
      return exact_.at(n);
    } else {
      return values_.at(n);
    }
  }

  /// p_0 + ... + p_{n-1}.
  template <class M>
  M cumulative(Digit n) const {
    M sum{0};
    for (Digit m = 0; m < n; ++m) sum += at<M>(m);
    return sum;
  }

  void require_exact() const {
    if (exact_.empty()) throw error(errc::domain_error, "probability vector is not exact");
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < size(); ++i) {
      if (i) s += ",";
      s += exact() ? ifs::to_string(exact_[i]) : std::to_string(values_[i]);
    }
    return s;
  }

  friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b) {
    return a.values_ == b.values_ && a.exact_ == b.exact_;
  }

 private:
  void finish() { max_ = *std::max_element(values_.begin(), values_.end()); }

  std::vector<double> values_;
  std::vector<Rational> exact_;
  double max_ = 0.0;
};

inline void check_compatible(const ContractionSystem& sys, const ProbabilityVector& p) {
  if (p.size() != sys.size())
    throw error(errc::bad_probability, "expected " + std::to_string(sys.size()) + " weights, got " +
                                           std::to_string(p.size()));
}

/// mu(f_w([0,1])) = prod p_{w_i}.
template <class M>
M cylinder_mass_as(const ProbabilityVector& p, std::span<const Digit> digits) {
  M mass{1};
  for (Digit d : digits) {
    if (d >= p.size()) throw error(errc::digit_out_of_range, "digit " + std::to_string(d));
    mass *= p.at<M>(d);
  }
  return mass;
}

inline double cylinder_mass(const ProbabilityVector& p, std::span<const Digit> digits) {
  return cylinder_mass_as<double>(p, digits);
}

/// Masses of all (N+1)^k depth-k cylinders, lexicographic order.
template <class M>
std::vector<M> level_masses(const ProbabilityVector& p, std::size_t k,
                            std::size_t cap = kDefaultIntervalCap) {
  detail::checked_power(p.size(), k, cap);
  std::vector<M> level{M(1)};
  for (std::size_t depth = 0; depth < k; ++depth) {
    std::vector<M> next;
    next.reserve(level.size() * p.size());
    for (const auto& m : level)
      for (Digit n = 0; n < p.size(); ++n) next.push_back(m * p.at<M>(n));
    level = std::move(next);
  }
  return level;
}

template <class M>
struct MassBracket {
  M lower{0};
  M upper{0};
};

namespace detail {

template <class T, class M>
void bracket_mass(const ContractionSystem& sys, const ProbabilityVector& p, const T& a, const T& b,
                  std::size_t k, Word& word, const M& mass, const T& lo, const T& hi,
                  const T& slack, MassBracket<M>& out) {
  if (hi < a || lo > b) return;
  const T overlap_lo = lo < a ? a : lo;
  const T overlap_hi = hi < b ? hi : b;
  // A single shared point carries no mass since mu has no atoms.
  if (!(overlap_hi > overlap_lo)) return;
  if (a <= lo + slack && hi <= b + slack) {
    out.lower += mass;
    out.upper += mass;
    return;
  }
  if (word.size() == k) {
    out.upper += mass;
    return;
  }
  const T zero_hat = sys.zero_hat_as<T>();
  const T one_hat = sys.one_hat_as<T>();
  for (Digit n = 0; n < sys.size(); ++n) {
    word.push_back(n);
    const T child_lo = sys.apply_word<T>(word, zero_hat);
    const T child_hi = sys.apply_word<T>(word, one_hat);
    bracket_mass<T, M>(sys, p, a, b, k, word, M(mass * p.at<M>(n)), child_lo, child_hi, slack, out);
    word.pop_back();
  }
}

}  // namespace detail

/// Two-sided bracket of mu([a,b]) from depth-k cylinders: those inside
/// [a,b] count towards both bounds, those straddling an endpoint only
/// towards the upper one. upper - lower <= 2 (max p)^k. A cylinder counts
/// as inside when it overhangs [a,b] by at most slack.
template <class T, class M>
MassBracket<M> interval_mass_as(const ContractionSystem& sys, const ProbabilityVector& p,
                                const T& a, const T& b, std::size_t k, const T& slack = T(0)) {
  check_compatible(sys, p);
  if (a < T(0) || b > T(1) || b < a) throw error(errc::domain_error, "need 0 <= a <= b <= 1");
  MassBracket<M> out;
  Word word;
  detail::bracket_mass<T, M>(sys, p, a, b, k, word, M(1), sys.zero_hat_as<T>(), sys.one_hat_as<T>(),
                             slack, out);
  return out;
}

inline std::pair<double, double> interval_mass(const ContractionSystem& sys,
                                               const ProbabilityVector& p, double a, double b,
                                               std::size_t k) {
  // Double endpoints carry rounding, so cylinders ending within tol_fix of
  // them count as inside.
  const double tol = sys.tolerances().fix;
  if (sys.exact() && p.exact()) {
    auto r = interval_mass_as<Rational, Rational>(sys, p, to_rational(a), to_rational(b), k, to_rational(tol));
    return {to_double(r.lower), to_double(r.upper)};
  }
  if (sys.exact()) {
    auto r = interval_mass_as<Rational, double>(sys, p, to_rational(a), to_rational(b), k, to_rational(tol));
    return {r.lower, r.upper};
  }
  auto r = interval_mass_as<double, double>(sys, p, a, b, k, tol);
  return {r.lower, r.upper};
}

/// Upper bound (max p)^k on the mass of any single point.
inline double atom_bound(const ProbabilityVector& p, std::size_t k) {
  return std::pow(p.max(), static_cast<double>(k));
}

// ---------------------------------------------------------------------------
// Sampling under the product measure P on {0..N}^N.

class DigitSampler {
 public:
  DigitSampler(const ProbabilityVector& p, std::uint64_t seed) : rng_(seed) {
    double acc = 0.0;
    for (double v : p.values()) {
      acc += v;
      cumulative_.push_back(acc);
    }
  }

  Digit next() {
    // 53 random bits in [0,1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    for (std::size_t n = 0; n + 1 < cumulative_.size(); ++n)
      if (u < cumulative_[n]) return static_cast<Digit>(n);
    return static_cast<Digit>(cumulative_.size() - 1);
  }

  Word word(std::size_t k) {
    Word w(k);
    for (auto& d : w) d = next();
    return w;
  }

 private:
  std::mt19937_64 rng_;
  std::vector<double> cumulative_;
};

inline Word sample_address(const ProbabilityVector& p, std::uint64_t seed, std::size_t k) {
  if (k < 1) throw error(errc::domain_error, "sample length must be >= 1");
  DigitSampler sampler(p, seed);
  return sampler.word(k);
}

/// {operation, inputs, estimate, exact_or_bound, n_samples, seed}.
struct EstimatorReport {
  std::string operation;
  nlohmann::json inputs;
  double estimate = 0.0;
  double exact_or_bound = 0.0;
  double tolerance = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;

  bool within_tolerance() const { return std::abs(estimate - exact_or_bound) <= tolerance; }

  nlohmann::json to_json() const {
    return {{"operation", operation},   {"inputs", inputs},      {"estimate", estimate},
            {"exact_or_bound", exact_or_bound}, {"tolerance", tolerance},
            {"n_samples", n_samples}, {"seed", seed}, {"pass", within_tolerance()}};
  }
};

/// Monte Carlo estimate of mu(T^{-1} B) for the cylinder B against the
/// exact mu(B). Points f_w(0^) are drawn with w ~ P, pushed through T once
/// and coded to |B| digits.
inline EstimatorReport preservation_check(const ContractionSystem& sys, const ProbabilityVector& p,
                                          const Word& cylinder, std::size_t n_samples,
                                          std::uint64_t seed, std::size_t sample_length = 0) {
  check_compatible(sys, p);
  sys.check_digits(cylinder);
  if (sample_length == 0) sample_length = cylinder.size() + 8;
  if (sample_length < cylinder.size() + 1)
    throw error(errc::domain_error, "sample length must exceed the cylinder depth");
  const double tol = sys.tolerances().inv;
  DigitSampler sampler(p, seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Word w = sampler.word(sample_length);
    const double y = sys.apply_word<double>(w, sys.zero_hat());
    double z = transfer<double>(sys, y, tol).second;
    bool hit = true;
    for (Digit d : cylinder) {
      auto [n, image] = transfer<double>(sys, z, tol);
      if (n != d) {
        hit = false;
        break;
      }
      z = image;
    }
    hits += hit ? 1 : 0;
  }
  EstimatorReport r;
  r.operation = "preservation_check";
  r.inputs = {{"cylinder", cylinder}, {"p", p.values()}, {"sample_length", sample_length}};
  r.estimate = n_samples ? static_cast<double>(hits) / static_cast<double>(n_samples) : 0.0;
  r.exact_or_bound = cylinder_mass(p, cylinder);
  r.tolerance = 4.0 * std::sqrt(r.exact_or_bound / static_cast<double>(std::max<std::size_t>(n_samples, 1)));
  r.n_samples = n_samples;
  r.seed = seed;
  return r;
}

/// P(sigma^{-m} A  intersect  B) for cylinders A and B on the symbolic side.
struct MixingReport {
  double exact_joint = 0.0;
  double product = 0.0;
  EstimatorReport monte_carlo;
};

/// Exact probability that digits m..m+|A|-1 spell A and digits 0..|B|-1
/// spell B; zero when the blocks overlap inconsistently.
template <class M>
M joint_cylinder_probability(const ProbabilityVector& p, const Word& a, const Word& b,
                             std::size_t lag) {
  const std::size_t length = std::max(b.size(), lag + a.size());
  M joint{1};
  for (std::size_t i = 0; i < length; ++i) {
    const bool in_a = i >= lag && i < lag + a.size();
    const bool in_b = i < b.size();
    if (in_a && in_b && a[i - lag] != b[i]) return M(0);
    if (in_a) {
      joint *= p.at<M>(a[i - lag]);
    } else if (in_b) {
      joint *= p.at<M>(b[i]);
    }
  }
  return joint;
}

inline MixingReport mixing_estimate(const ContractionSystem& sys, const ProbabilityVector& p,
                                    const Word& a, const Word& b, std::size_t lag,
                                    std::size_t n_samples, std::uint64_t seed) {
  check_compatible(sys, p);
  sys.check_digits(a);
  sys.check_digits(b);
  MixingReport out;
  out.exact_joint = joint_cylinder_probability<double>(p, a, b, lag);
  out.product = cylinder_mass(p, a) * cylinder_mass(p, b);

  const std::size_t length = std::max(b.size(), lag + a.size());
  DigitSampler sampler(p, seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Word w = sampler.word(length);
    const bool in_b = std::equal(b.begin(), b.end(), w.begin());
    const bool in_a = std::equal(a.begin(), a.end(), w.begin() + static_cast<std::ptrdiff_t>(lag));
    hits += (in_a && in_b) ? 1 : 0;
  }
  auto& r = out.monte_carlo;
  r.operation = "mixing_estimate";
  r.inputs = {{"A", a}, {"B", b}, {"lag", lag}, {"p", p.values()}};
  r.estimate = n_samples ? static_cast<double>(hits) / static_cast<double>(n_samples) : 0.0;
  r.exact_or_bound = out.exact_joint;
  r.tolerance = 4.0 * std::sqrt(out.exact_joint * (1.0 - out.exact_joint) /
                                static_cast<double>(std::max<std::size_t>(n_samples, 1)));
  r.n_samples = n_samples;
  r.seed = seed;
  return out;
}

}  // namespace ifs
