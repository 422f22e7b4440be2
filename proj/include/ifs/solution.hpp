#pragma once

// The increasing solution phi(x) = mu([0,x]) of
//   phi(x) = sum_n phi(f_n(x)) - sum_n phi(f_n(0)),
// evaluated through its address series, its plateau constants on gaps and
// exact flank values.

#include "ifs/invariant_measure.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ifs {

template <class M>
struct PhiValue {
  M value{0};
  M error{0};  // zero on every exact path
};

/// Partial address series over `digits`:
///   sum_l [x_l > 0] * prod_{i<l} p_{x_i} * (p_0 + ... + p_{x_l - 1}),
/// together with the remaining cylinder mass prod_i p_{x_i}.
template <class M>
struct SeriesState {
  M partial{0};
  M mass{1};

  void push(const ProbabilityVector& p, Digit d) {
    if (d > 0) partial += mass * p.cumulative<M>(d);
    mass *= p.at<M>(d);
  }
};

template <class M>
SeriesState<M> series_prefix(const ProbabilityVector& p, std::span<const Digit> digits) {
  SeriesState<M> s;
  for (Digit d : digits) {
    if (d >= p.size()) throw error(errc::digit_out_of_range, "digit " + std::to_string(d));
    s.push(p, d);
  }
  return s;
}

/// Value of phi on the gap with the given digits: the partial series plus
/// the cylinder mass (an all-N tail sums to exactly that mass).
template <class M>
M plateau_value(const ProbabilityVector& p, std::span<const Digit> digits) {
  const auto s = series_prefix<M>(p, digits);
  return s.partial + s.mass;
}

/// Series value of an exact-tailed address.
template <class M>
M address_value(const ProbabilityVector& p, const Address& a) {
  if (!a.exact()) throw error(errc::domain_error, "address is truncated");
  const auto s = series_prefix<M>(p, a.prefix);
  return a.tail == Tail::constant0 ? s.partial : M(s.partial + s.mass);
}

struct PlateauValue {
  Word digits;
  double left = 0.0;
  double right = 0.0;
  double value = 0.0;
  std::optional<Rational> exact_value;
};

class SolutionPhi {
 public:
  SolutionPhi(ContractionSystem sys, ProbabilityVector p, double tol_phi = Tolerances{}.phi)
      : sys_(std::move(sys)), p_(std::move(p)), tol_(tol_phi) {
    check_compatible(sys_, p_);
    if (!(tol_ > 0.0) || !(tol_ < 1.0)) throw error(errc::domain_error, "tol_phi must be in (0,1)");
  }

  const ContractionSystem& system() const noexcept { return sys_; }
  const ProbabilityVector& probabilities() const noexcept { return p_; }
  double tolerance() const noexcept { return tol_; }

  /// Exact rational geometry and weights.
  bool rational_mode() const noexcept { return sys_.exact() && p_.exact(); }

  /// phi at x. Flanks and gaps are exact; attractor points sum the address
  /// series until the remaining cylinder mass drops below tol_phi and
  /// report the midpoint of the resulting bracket.
  template <class T, class M>
  PhiValue<M> evaluate(const T& x) const {
    if (x < T(0) || x > T(1)) throw error(errc::domain_error, "x outside [0,1]");
    SeriesState<M> state;
    double mass = 1.0;
    // The hard depth cap only matters for pathological tolerances.
    const std::size_t depth_cap = 1 + static_cast<std::size_t>(
        std::ceil(std::log(tol_) / std::log(std::max(p_.max(), 1e-300))));
    auto keep_going = [&](const Word& w) {
      state.push(p_, w.back());
      mass *= p_[w.back()];
      return mass > tol_ && w.size() < depth_cap;
    };
    const Verdict<T> verdict = detail::walk<T>(sys_, x, keep_going);

    if (const auto* f = std::get_if<InFlank>(&verdict))
      return {f->side == Side::left ? M(0) : M(1), M(0)};
    if (const auto* g = std::get_if<InGap<T>>(&verdict))
      return {plateau_value<M>(p_, g->gap.digits), M(0)};
    if (const auto* a = std::get_if<InAttractorCylinder>(&verdict))
      return {address_value<M>(p_, a->address), M(0)};
    // Undecided: phi(x) lies in [partial, partial + mass].
    const auto& digits = std::get<Undecided>(verdict).digits;
    const auto s = series_prefix<M>(p_, digits);
    return {M(s.partial + s.mass / 2), M(s.mass / 2)};
  }

  /// phi at x with an absolute error bound.
  Estimate operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw error(errc::domain_error, "x outside [0,1]");
    if (sys_.exact()) {
      const Rational xr = to_rational(x);
      if (p_.exact()) return convert(evaluate<Rational, Rational>(xr));
      return convert(evaluate<Rational, double>(xr));
    }
    return convert(evaluate<double, double>(x));
  }

  /// phi at an exact point of an affine system.
  Estimate operator()(const Rational& x) const {
    sys_.require_exact();
    if (p_.exact()) return convert(evaluate<Rational, Rational>(x));
    return convert(evaluate<Rational, double>(x));
  }

  /// Exact value in rational mode; the error is zero unless x needed the
  /// truncated series.
  PhiValue<Rational> exact_at(const Rational& x) const {
    if (!rational_mode()) throw error(errc::domain_error, "exact evaluation needs rational mode");
    return evaluate<Rational, Rational>(x);
  }

  friend bool same_system(const SolutionPhi& a, const SolutionPhi& b) { return a.sys_ == b.sys_; }

 private:
  template <class M>
  static Estimate convert(const PhiValue<M>& v) {
    return {to_double(v.value), to_double(v.error)};
  }

  ContractionSystem sys_;
  ProbabilityVector p_;
  double tol_;
};

inline Estimate phi_eval(const SolutionPhi& sol, double x) { return sol(x); }

/// Plateau constant c_w of phi on [f_w(1^), f_{w+}(0^)], last digit < N.
inline PlateauValue plateau(const SolutionPhi& sol, const Word& digits) {
  const auto& sys = sol.system();
  sys.check_digits(digits);
  if (digits.empty()) throw error(errc::domain_error, "plateau needs at least one digit");
  if (digits.back() == sys.max_digit())
    throw error(errc::last_digit_is_n, "last digit must be < N");
  PlateauValue out;
  out.digits = digits;
  Word next = digits;
  ++next.back();
  if (sys.exact()) {
    out.left = to_double(sys.apply_word<Rational>(digits, sys.one_hat_as<Rational>()));
    out.right = to_double(sys.apply_word<Rational>(next, sys.zero_hat_as<Rational>()));
  } else {
    out.left = sys.apply_word<double>(digits, sys.one_hat());
    out.right = sys.apply_word<double>(next, sys.zero_hat());
  }
  if (sol.probabilities().exact()) {
    out.exact_value = plateau_value<Rational>(sol.probabilities(), digits);
    out.value = to_double(*out.exact_value);
  } else {
    out.value = plateau_value<double>(sol.probabilities(), digits);
  }
  return out;
}

namespace detail {

// Runs body<T, M>() with the most exact geometry T and mass type M available.
template <class Body>
auto with_arithmetic(const SolutionPhi& sol, Body&& body) {
  if (sol.rational_mode()) return body.template operator()<Rational, Rational>();
  if (sol.system().exact()) return body.template operator()<Rational, double>();
  return body.template operator()<double, double>();
}

}  // namespace detail

/// phi(x) - sum_n phi(f_n(x)) + sum_n phi(f_n(0)) with the accumulated
/// evaluation error as the bound.
inline Estimate equation_residual(const SolutionPhi& sol, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw error(errc::domain_error, "x outside [0,1]");
  const auto& sys = sol.system();
  auto body = [&]<class T, class M>() {
    const T xt = from_double<T>(x);
    M residual{0};
    M err{0};
    auto add = [&](const T& point, int sign) {
      const PhiValue<M> v = sol.evaluate<T, M>(point);
      if (sign > 0) {
        residual += v.value;
      } else {
        residual -= v.value;
      }
      err += v.error;
    };
    add(xt, +1);
    for (Digit n = 0; n < sys.size(); ++n) {
      add(sys.apply(n, xt), -1);
      add(sys.apply(n, T(0)), +1);
    }
    return Estimate{to_double(residual), to_double(err)};
  };
  return detail::with_arithmetic(sol, body);
}

struct BoundaryCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  bool exact = false;
  bool pass = false;
};

struct BoundaryReport {
  std::vector<BoundaryCheck> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundaryCheck& c) { return c.pass; });
  }
};

/// Boundary identities: phi vanishes up to 0^ (in particular at f_0(0)),
/// equals one from 1^ on (in particular at f_N(1)), and takes equal values
/// at f_n(1), f_{n+1}(0) and across each first-level gap.
inline BoundaryReport boundary_report(const SolutionPhi& sol) {
  const auto& sys = sol.system();
  auto body = [&]<class T, class M>() {
    BoundaryReport report;
    const double slack = 2.0 * sol.tolerance();
    auto push = [&](std::string name, const PhiValue<M>& v, const M& expected) {
      BoundaryCheck c;
      c.name = std::move(name);
      c.value = to_double(v.value);
      c.expected = to_double(expected);
      c.exact = is_exact_v<M> && is_exact_v<T> && v.error == 0;
      if constexpr (is_exact_v<M> && is_exact_v<T>) {
        c.pass = v.value == expected && v.error == 0;
      } else {
        c.pass = std::abs(to_double(M(v.value - expected))) <= slack + to_double(v.error);
      }
      report.checks.push_back(std::move(c));
    };
    auto phi = [&](const T& x) { return sol.evaluate<T, M>(x); };
    const T zero_hat = sys.zero_hat_as<T>();
    const T one_hat = sys.one_hat_as<T>();
    const Digit last = sys.max_digit();

    push("phi(0) = 0", phi(T(0)), M(0));
    push("phi(0^) = 0", phi(zero_hat), M(0));
    push("phi(f_0(0)) = 0", phi(sys.apply(0, T(0))), M(0));
    push("phi = 0 on [0, 0^] (midpoint)", phi(T(zero_hat / 2)), M(0));
    push("phi(f_N(1)) = 1", phi(sys.apply(last, T(1))), M(1));
    push("phi(1^) = 1", phi(one_hat), M(1));
    push("phi(1) = 1", phi(T(1)), M(1));
    push("phi = 1 on [1^, 1] (midpoint)", phi(T((one_hat + 1) / 2)), M(1));
    for (Digit n = 0; n < last; ++n) {
      const std::string tag = std::to_string(n);
      const std::string next = std::to_string(n + 1);
      const auto right_end = phi(sys.apply(n, T(1)));
      push("phi(f_" + tag + "(1)) = phi(f_" + next + "(0))", phi(sys.apply(n + 1, T(0))),
           right_end.value);
      const T gap_left = sys.apply(n, one_hat);
      const T gap_right = sys.apply(n + 1, zero_hat);
      const auto plateau_left = phi(gap_left);
      push("phi(f_" + tag + "(1^)) = phi(f_" + next + "(0^))", phi(gap_right), plateau_left.value);
      push("phi constant on [f_" + tag + "(1^), f_" + next + "(0^)] (midpoint)",
           phi(T((gap_left + gap_right) / 2)), plateau_left.value);
    }
    return report;
  };
  return detail::with_arithmetic(sol, body);
}

struct SingularityEvidence {
  double support_length = 0.0;
  double variation_on_support = 0.0;
  std::optional<Rational> exact_support_length;
  std::optional<Rational> exact_variation;
};

/// Length of A_k and the total increase of phi across its depth-k
/// cylinders, which is always 1.
inline SingularityEvidence singularity_evidence(const SolutionPhi& sol, std::size_t k) {
  if (k < 1) throw error(errc::domain_error, "depth must be >= 1");
  const auto& sys = sol.system();
  SingularityEvidence out;
  out.support_length = measure_bound(sys, k);
  if (sys.exact()) out.exact_support_length = measure_bound_exact(sys, k);
  auto body = [&]<class T, class M>() {
    M total{0};
    for (const auto& c : cylinders<T>(sys, k)) {
      total += sol.evaluate<T, M>(c.right).value;
      total -= sol.evaluate<T, M>(c.left).value;
    }
    return total;
  };
  if (sol.rational_mode()) {
    out.exact_variation = detail::with_arithmetic(sol, [&]<class T, class M>() {
      return Rational(body.template operator()<T, M>());
    });
    out.variation_on_support = to_double(*out.exact_variation);
  } else {
    out.variation_on_support = detail::with_arithmetic(sol, [&]<class T, class M>() {
      return to_double(body.template operator()<T, M>());
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear combinations of solutions.

/// Phi = sum_i alpha_i phi_i + alpha_0 over solutions sharing one system.
class Combination {
 public:
  Combination(std::vector<SolutionPhi> solutions, std::vector<Rational> alphas, Rational alpha0)
      : solutions_(std::move(solutions)),
        exact_alphas_(std::move(alphas)),
        exact_alpha0_(std::move(alpha0)) {
    if (solutions_.empty()) throw error(errc::domain_error, "need at least one solution");
    if (exact_alphas_.size() != solutions_.size())
      throw error(errc::domain_error, "one coefficient per solution is required");
    for (const auto& s : solutions_)
      if (!same_system(s, solutions_.front()))
        throw error(errc::mixed_systems, "solutions must share one contraction system");
    for (const auto& a : exact_alphas_) alphas_.push_back(to_double(a));
    alpha0_ = to_double(exact_alpha0_);
  }

  Combination(std::vector<SolutionPhi> solutions, const std::vector<double>& alphas, double alpha0)
      : Combination(std::move(solutions), exact_values(alphas), to_rational(alpha0)) {}

  const ContractionSystem& system() const { return solutions_.front().system(); }
  const std::vector<SolutionPhi>& solutions() const noexcept { return solutions_; }
  const std::vector<double>& alphas() const noexcept { return alphas_; }
  const std::vector<Rational>& exact_alphas() const noexcept { return exact_alphas_; }
  double alpha0() const noexcept { return alpha0_; }

  template <class X>
  Estimate operator()(const X& x) const {
    Estimate out{alpha0_, 0.0};
    for (std::size_t i = 0; i < solutions_.size(); ++i) {
      const Estimate v = solutions_[i](x);
      out.value += alphas_[i] * v.value;
      out.error += std::abs(alphas_[i]) * v.error;
    }
    return out;
  }

  /// Exact value in rational mode. Empty when any solution is not rational
  /// or x needs the truncated series.
  std::optional<Rational> exact_at(const Rational& x) const {
    Rational total = exact_alpha0_;
    for (std::size_t i = 0; i < solutions_.size(); ++i) {
      if (!solutions_[i].rational_mode()) return std::nullopt;
      const auto v = solutions_[i].exact_at(x);
      if (v.error != 0) return std::nullopt;
      total += exact_alphas_[i] * v.value;
    }
    return total;
  }

  /// +1 if every coefficient is >= 0, -1 if every one is <= 0, 0 otherwise.
  int sign() const {
    const bool nonneg = std::all_of(alphas_.begin(), alphas_.end(), [](double a) { return a >= 0; });
    const bool nonpos = std::all_of(alphas_.begin(), alphas_.end(), [](double a) { return a <= 0; });
    return nonneg ? 1 : (nonpos ? -1 : 0);
  }

  /// Monotonicity on the grid i/M, in the direction given by sign().
  bool monotone_on_grid(std::size_t grid) const {
    const int s = sign();
    if (s == 0) return false;
    double prev = (*this)(0.0).value;
    double slack = 0.0;
    for (std::size_t i = 0; i < solutions_.size(); ++i)
      slack += 2.0 * std::abs(alphas_[i]) * solutions_[i].tolerance();
    for (std::size_t i = 1; i <= grid; ++i) {
      const double cur = (*this)(static_cast<double>(i) / static_cast<double>(grid)).value;
      if (s * (cur - prev) < -slack) return false;
      prev = cur;
    }
    return true;
  }

 private:
  static std::vector<Rational> exact_values(const std::vector<double>& values) {
    std::vector<Rational> out;
    for (double v : values) out.push_back(to_rational(v));
    return out;
  }

  std::vector<SolutionPhi> solutions_;
  std::vector<Rational> exact_alphas_;
  Rational exact_alpha0_;
  std::vector<double> alphas_;
  double alpha0_ = 0.0;
};

/// Phi(x) - sum_{n=0}^{N} Phi(f_n(x)) + sum_{n=1}^{N} Phi(f_n(0)).
/// Note the second sum starts at n = 1.
inline Estimate matkowski_residual(const Combination& phi, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw error(errc::domain_error, "x outside [0,1]");
  const auto& sys = phi.system();
  auto run = [&](const auto& xt) {
    using T = std::decay_t<decltype(xt)>;
    Estimate out = phi(xt);
    for (Digit n = 0; n < sys.size(); ++n) {
      const Estimate image = phi(sys.apply(n, xt));
      out.value -= image.value;
      out.error += image.error;
      if (n >= 1) {
        const Estimate at_zero = phi(sys.apply(n, T(0)));
        out.value += at_zero.value;
        out.error += at_zero.error;
      }
    }
    return out;
  };
  if (sys.exact()) return run(to_rational(x));
  return run(x);
}

inline Estimate matkowski_residual(const std::vector<SolutionPhi>& solutions,
                                   const std::vector<double>& alphas, double alpha0, double x) {
  return matkowski_residual(Combination(solutions, alphas, alpha0), x);
}

}  // namespace ifs
