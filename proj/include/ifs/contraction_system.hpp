#pragma once

// Strictly increasing contractions of [0,1] and the validated, ordered
// family they form.

#include "ifs/core.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ifs {

/// A strictly increasing contraction of [0,1].
///
/// Affine maps x -> slope*x + intercept keep exact rational coefficients so
/// that every derived quantity can be computed without rounding. General
/// maps carry a forward evaluator and a caller-certified Lipschitz bound.
class ContractionMap {
 public:
  static ContractionMap affine(Rational slope, Rational intercept) {
    ContractionMap m;
    m.affine_ = true;
    m.slope_ = std::move(slope);
    m.intercept_ = std::move(intercept);
    m.slope_d_ = to_double(m.slope_);
    m.intercept_d_ = to_double(m.intercept_);
    m.lipschitz_ = m.slope_d_;
    m.name_ = "affine(" + to_string(m.slope_) + "," + to_string(m.intercept_) + ")";
    return m;
  }

  static ContractionMap affine(double slope, double intercept) {
    return affine(to_rational(slope), to_rational(intercept));
  }

  static ContractionMap general(std::function<double(double)> f, double lipschitz,
                                std::string name) {
    ContractionMap m;
    m.affine_ = false;
    m.fn_ = std::make_shared<const std::function<double(double)>>(std::move(f));
    m.lipschitz_ = lipschitz;
    m.name_ = std::move(name);
    return m;
  }

  /// The empty composition. Not a contraction; only produced by compose().
  static ContractionMap identity() { return affine(Rational(1), Rational(0)); }

  bool is_affine() const noexcept { return affine_; }
  const Rational& slope() const { return require_affine(), slope_; }
  const Rational& intercept() const { return require_affine(), intercept_; }
  double lipschitz() const noexcept { return lipschitz_; }
  const std::string& name() const noexcept { return name_; }

  double operator()(double x) const {
    return affine_ ? slope_d_ * x + intercept_d_ : (*fn_)(x);
  }

  Rational operator()(const Rational& x) const {
    require_affine();
    return slope_ * x + intercept_;
  }

  /// Preimage of y. General maps are bisected until the bracket is narrower
  /// than `tol`; tol = 0 bisects to full double precision.
  double inverse(double y, double tol = 0.0) const {
    if (affine_) return (y - intercept_d_) / slope_d_;
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > tol) {
      double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      if ((*fn_)(mid) < y) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo + 0.5 * (hi - lo);
  }

  Rational inverse(const Rational& y) const {
    require_affine();
    return (y - intercept_) / slope_;
  }

  /// Structural equality: affine maps compare coefficients, general maps
  /// compare by identity of their evaluator.
  friend bool operator==(const ContractionMap& a, const ContractionMap& b) {
    if (a.affine_ != b.affine_) return false;
    if (a.affine_) return a.slope_ == b.slope_ && a.intercept_ == b.intercept_;
    return a.fn_ == b.fn_ && a.lipschitz_ == b.lipschitz_;
  }

 private:
  void require_affine() const {
    if (!affine_) throw error(errc::domain_error, "exact evaluation of a general map " + name_);
  }

  bool affine_ = true;
  Rational slope_{1};
  Rational intercept_{0};
  double slope_d_ = 1.0;
  double intercept_d_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> fn_;
  double lipschitz_ = 1.0;
  std::string name_;
};

namespace detail {

inline constexpr int kCertificationGrid = 1024;

// Individual well-formedness of a map: image inside [0,1], strictly
// increasing, contraction.
inline void check_map(const ContractionMap& f, std::size_t index) {
  const std::string where = "map " + std::to_string(index) + " (" + f.name() + ")";
  if (f.is_affine()) {
    if (f.slope() <= 0) throw error(errc::malformed_map, where + ": slope must be positive");
    if (f.slope() >= 1) throw error(errc::not_contractive, where + ": slope >= 1");
    if (f.intercept() < 0 || f.slope() + f.intercept() > 1)
      throw error(errc::malformed_map, where + ": image leaves [0,1]");
    return;
  }
  const double lip = f.lipschitz();
  if (!(lip > 0.0) || !(lip < 1.0))
    throw error(errc::not_contractive, where + ": certified Lipschitz bound not in (0,1)");
  if (f(0.0) < 0.0 || f(1.0) > 1.0) throw error(errc::malformed_map, where + ": image leaves [0,1]");
  const double h = 1.0 / kCertificationGrid;
  double prev = f(0.0);
  for (int i = 1; i <= kCertificationGrid; ++i) {
    const double cur = f(i * h);
    if (!(cur > prev)) throw error(errc::malformed_map, where + ": not strictly increasing");
    if (cur - prev > lip * h * (1.0 + 1e-9) + 1e-15)
      throw error(errc::not_contractive, where + ": Lipschitz bound violated on grid");
    prev = cur;
  }
}

}  // namespace detail

/// Ordered family f_0 < f_1 < ... < f_N with images that leave a gap in
/// [0,1]. Immutable once validated.
class ContractionSystem {
 public:
  static ContractionSystem validate(std::vector<ContractionMap> maps, Tolerances tol = {}) {
    if (maps.size() < 2)
      throw error(errc::ordering_violation, "a system needs at least two maps");
    for (std::size_t i = 0; i < maps.size(); ++i) detail::check_map(maps[i], i);

    ContractionSystem sys;
    sys.maps_ = std::move(maps);
    sys.tol_ = tol;
    sys.exact_ = std::all_of(sys.maps_.begin(), sys.maps_.end(),
                             [](const ContractionMap& f) { return f.is_affine(); });
    const std::size_t count = sys.maps_.size();
    sys.touching_.assign(count - 1, false);

    for (const auto& f : sys.maps_) sys.lipschitz_ = std::max(sys.lipschitz_, f.lipschitz());

    if (sys.exact_) {
      Rational slack = sys.maps_.front().intercept();
      for (std::size_t n = 0; n + 1 < count; ++n) {
        const Rational right = sys.maps_[n](Rational(1));
        const Rational next_left = sys.maps_[n + 1](Rational(0));
        if (right > next_left)
          throw error(errc::ordering_violation,
                      "f_" + std::to_string(n) + "(1) > f_" + std::to_string(n + 1) + "(0)");
        sys.touching_[n] = right == next_left;
        slack += next_left - right;
      }
      slack += 1 - sys.maps_.back()(Rational(1));
      if (slack <= 0) throw error(errc::cover_violation, "images cover [0,1]");
      sys.slack_ = to_double(slack);
      const auto& f0 = sys.maps_.front();
      const auto& fN = sys.maps_.back();
      sys.zero_hat_exact_ = f0.intercept() / (1 - f0.slope());
      sys.one_hat_exact_ = fN.intercept() / (1 - fN.slope());
      sys.zero_hat_ = to_double(sys.zero_hat_exact_);
      sys.one_hat_ = to_double(sys.one_hat_exact_);
    } else {
      double slack = sys.maps_.front()(0.0);
      for (std::size_t n = 0; n + 1 < count; ++n) {
        const double right = sys.maps_[n](1.0);
        const double next_left = sys.maps_[n + 1](0.0);
        if (right > next_left + tol.fix)
          throw error(errc::ordering_violation,
                      "f_" + std::to_string(n) + "(1) > f_" + std::to_string(n + 1) + "(0)");
        sys.touching_[n] = std::abs(right - next_left) <= tol.fix;
        if (!sys.touching_[n]) slack += next_left - right;
      }
      slack += 1.0 - sys.maps_.back()(1.0);
      if (!(slack > tol.fix)) throw error(errc::cover_violation, "images cover [0,1]");
      sys.slack_ = slack;
      sys.zero_hat_ = iterate_to_fixed_point(sys.maps_.front(), 0.0, tol.fix);
      sys.one_hat_ = iterate_to_fixed_point(sys.maps_.back(), 1.0, tol.fix);
    }
    return sys;
  }

  std::size_t size() const noexcept { return maps_.size(); }
  Digit max_digit() const noexcept { return static_cast<Digit>(maps_.size() - 1); }
  const ContractionMap& map(Digit n) const { return maps_.at(n); }
  std::span<const ContractionMap> maps() const noexcept { return maps_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

  /// True when every map is affine; exact rational evaluation is available.
  bool exact() const noexcept { return exact_; }
  double lipschitz() const noexcept { return lipschitz_; }
  /// Total length of [0,1] not covered by the first-level images.
  double gap_slack() const noexcept { return slack_; }
  /// f_n(1) == f_{n+1}(0).
  bool touching(Digit n) const { return touching_.at(n); }

  double zero_hat() const noexcept { return zero_hat_; }
  double one_hat() const noexcept { return one_hat_; }

  template <class T>
  T zero_hat_as() const {
    if constexpr (is_exact_v<T>) {
      require_exact();
      return zero_hat_exact_;
    } else {
      return zero_hat_;
    }
  }

  template <class T>
  T one_hat_as() const {
    if constexpr (is_exact_v<T>) {
      require_exact();
      return one_hat_exact_;
    } else {
      return one_hat_;
    }
  }

  template <class T>
  T apply(Digit n, const T& x) const {
    return maps_[n](x);
  }

  /// f_{w_1} o ... o f_{w_k} (x); the last digit acts first.
  template <class T>
  T apply_word(std::span<const Digit> word, T x) const {
    check_digits(word);
    for (auto it = word.rbegin(); it != word.rend(); ++it) x = maps_[*it](x);
    return x;
  }

  template <class T>
  T inverse(Digit n, const T& y) const {
    if constexpr (is_exact_v<T>) {
      return maps_[n].inverse(y);
    } else {
      return maps_[n].inverse(y, 0.0);
    }
  }

  void check_digit(Digit d) const {
    if (d >= maps_.size())
      throw error(errc::digit_out_of_range,
                  "digit " + std::to_string(d) + " > N = " + std::to_string(max_digit()));
  }

  void check_digits(std::span<const Digit> word) const {
    for (Digit d : word) check_digit(d);
  }

  void require_exact() const {
    if (!exact_) throw error(errc::domain_error, "exact arithmetic requires an affine system");
  }

  /// Lebesgue measure of [0,1] minus the first-level images for affine
  /// systems, i.e. 1 - sum of slopes.
  std::optional<Rational> first_level_gap() const {
    if (!exact_) return std::nullopt;
    Rational d = 1;
    for (const auto& f : maps_) d -= f.slope();
    return d;
  }

  friend bool operator==(const ContractionSystem& a, const ContractionSystem& b) {
    return a.maps_ == b.maps_;
  }

 private:
  static double iterate_to_fixed_point(const ContractionMap& f, double start, double tol) {
    double x = start;
    for (;;) {
      const double next = f(x);
      if (std::abs(next - x) < tol * (1.0 - f.lipschitz()) || next == x) return next;
      x = next;
    }
  }

  std::vector<ContractionMap> maps_;
  std::vector<bool> touching_;
  Tolerances tol_;
  bool exact_ = false;
  double lipschitz_ = 0.0;
  double slack_ = 0.0;
  double zero_hat_ = 0.0;
  double one_hat_ = 1.0;
  Rational zero_hat_exact_{0};
  Rational one_hat_exact_{1};
};

inline ContractionSystem validate_system(std::vector<ContractionMap> maps, Tolerances tol = {}) {
  return ContractionSystem::validate(std::move(maps), tol);
}

/// f_{n_1,...,n_k}; the empty word gives the identity.
inline ContractionMap compose(const ContractionSystem& sys, std::span<const Digit> digits) {
  sys.check_digits(digits);
  if (digits.empty()) return ContractionMap::identity();
  if (sys.exact()) {
    Rational slope = 1;
    Rational intercept = 0;
    // (f_w o g)(x) = a_w (a_g x + b_g) + b_w; fold from the outermost map.
    for (Digit d : digits) {
      const auto& f = sys.map(d);
      intercept += slope * f.intercept();
      slope *= f.slope();
    }
    return ContractionMap::affine(slope, intercept);
  }
  std::vector<ContractionMap> chain;
  double lip = 1.0;
  std::string name;
  for (Digit d : digits) {
    chain.push_back(sys.map(d));
    lip *= sys.map(d).lipschitz();
    name += (name.empty() ? "" : "o") + std::string("f") + std::to_string(d);
  }
  return ContractionMap::general(
      [chain = std::move(chain)](double x) {
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) x = (*it)(x);
        return x;
      },
      lip, name);
}

/// Preimage of y under f; affine maps use the closed form, general maps
/// bisection to `tol`.
inline double invert(const ContractionMap& f, double y, double tol = Tolerances{}.inv) {
  const double lo = f(0.0);
  const double hi = f(1.0);
  if (y < lo - tol || y > hi + tol)
    throw error(errc::out_of_image, "y = " + std::to_string(y) + " outside [f(0), f(1)]");
  if (f.is_affine()) return std::clamp(f.inverse(y), 0.0, 1.0);
  return f.inverse(std::clamp(y, lo, hi), tol);
}

/// (0^, 1^): the fixed points of f_0 and f_N.
inline std::pair<double, double> extremal_fixed_points(const ContractionSystem& sys) {
  return {sys.zero_hat(), sys.one_hat()};
}

}  // namespace ifs
