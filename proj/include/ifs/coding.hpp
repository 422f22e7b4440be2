#pragma once

// Addresses, the coding map pi, the transfer map T with its max tie-break,
// the Bernoulli shift and the bookkeeping of doubly coded points.

#include "ifs/attractor.hpp"

#include <algorithm>
#include <charconv>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ifs {

/// Text form: digits joined by '.', then "^0", "^N" or "^?".
inline std::string to_string(const Address& a) {
  std::string s = word_to_string(a.prefix);
  switch (a.tail) {
    case Tail::constant0: s += "^0"; break;
    case Tail::constant_n: s += "^N"; break;
    case Tail::truncated: s += "^?"; break;
  }
  return s;
}

inline Address parse_address(std::string_view text) {
  const auto caret = text.rfind('^');
  if (caret == std::string_view::npos || caret + 2 != text.size())
    throw error(errc::parse_error, "address needs a tail suffix ^0, ^N or ^?: " + std::string(text));
  Address a;
  switch (text[caret + 1]) {
    case '0': a.tail = Tail::constant0; break;
    case 'N': a.tail = Tail::constant_n; break;
    case '?': a.tail = Tail::truncated; break;
    default: throw error(errc::parse_error, "unknown tail in " + std::string(text));
  }
  std::string_view digits = text.substr(0, caret);
  while (!digits.empty()) {
    const auto dot = digits.find('.');
    const std::string_view token = digits.substr(0, dot);
    Digit d = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), d);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
      throw error(errc::parse_error, "bad digit '" + std::string(token) + "'");
    a.prefix.push_back(d);
    if (dot == std::string_view::npos) break;
    digits.remove_prefix(dot + 1);
    if (digits.empty()) throw error(errc::parse_error, "trailing '.' in address");
  }
  return a;
}

struct AmbiguityTable {
  std::vector<Digit> nb;    // n with f_n(1) == f_{n+1}(0)
  bool zb_active = false;   // f_0(0) = 0, f_N(1) = 1 and nb non-empty

  bool contains(Digit n) const { return std::find(nb.begin(), nb.end(), n) != nb.end(); }
};

inline AmbiguityTable ambiguity(const ContractionSystem& sys) {
  AmbiguityTable table;
  for (Digit n = 0; n < sys.max_digit(); ++n)
    if (sys.touching(n)) table.nb.push_back(n);
  bool pinned = false;
  if (sys.exact()) {
    pinned = sys.map(0).intercept() == 0 && sys.map(sys.max_digit())(Rational(1)) == 1;
  } else {
    const double tol = sys.tolerances().fix;
    pinned = std::abs(sys.map(0)(0.0)) <= tol && std::abs(sys.map(sys.max_digit())(1.0) - 1.0) <= tol;
  }
  table.zb_active = pinned && !table.nb.empty();
  return table;
}

/// n(y) = the largest n whose hull [f_n(0^), f_n(1^)] holds y, and
/// T(y) = f_n^{-1}(y). Throws NotInAttractor for points in a gap or flank.
template <class T>
std::pair<Digit, T> transfer(const ContractionSystem& sys, const T& y, double tol) {
  const T zero_hat = sys.zero_hat_as<T>();
  const T one_hat = sys.one_hat_as<T>();
  for (Digit n = sys.max_digit() + 1; n-- > 0;) {
    const T lo = sys.apply(n, zero_hat);
    const T hi = sys.apply(n, one_hat);
    const bool above_lo = lo <= y || near(y, lo, tol);
    const bool below_hi = y <= hi || near(y, hi, tol);
    if (above_lo && below_hi) {
      T image = sys.inverse(n, y);
      if (image < zero_hat) image = zero_hat;
      if (image > one_hat) image = one_hat;
      return {n, std::move(image)};
    }
    if (above_lo) break;
  }
  throw error(errc::not_in_attractor, "point lies outside every first-level hull");
}

inline std::pair<Digit, double> transfer(const ContractionSystem& sys, double y) {
  if (sys.exact()) {
    auto [n, image] = transfer<Rational>(sys, to_rational(y), 0.0);
    return {n, to_double(image)};
  }
  return transfer<double>(sys, y, sys.tolerances().inv);
}

/// Digits of x by repeated transfer. Stops with an exact tail once the
/// residual reaches 0^ or 1^, otherwise truncates after max_depth digits.
template <class T>
Address extract_address(const ContractionSystem& sys, T x, std::size_t max_depth) {
  const double tol = sys.tolerances().fix;
  const T zero_hat = sys.zero_hat_as<T>();
  const T one_hat = sys.one_hat_as<T>();
  Address a;
  for (;;) {
    if (near(x, zero_hat, tol)) {
      a.tail = Tail::constant0;
      return a;
    }
    if (near(x, one_hat, tol)) {
      a.tail = Tail::constant_n;
      return a;
    }
    if (a.prefix.size() >= max_depth) {
      a.tail = Tail::truncated;
      return a;
    }
    auto [n, image] = transfer<T>(sys, x, is_exact_v<T> ? 0.0 : sys.tolerances().inv);
    a.prefix.push_back(n);
    x = std::move(image);
  }
}

inline Address extract_address(const ContractionSystem& sys, double x, std::size_t max_depth) {
  if (sys.exact()) return extract_address<Rational>(sys, to_rational(x), max_depth);
  return extract_address<double>(sys, x, max_depth);
}

/// The exact point of an address with a constant tail.
template <class T>
T pi_exact_tail(const ContractionSystem& sys, const Address& a) {
  if (!a.exact()) throw error(errc::domain_error, "truncated address has no exact point");
  const T end = a.tail == Tail::constant0 ? sys.zero_hat_as<T>() : sys.one_hat_as<T>();
  return sys.apply_word<T>(a.prefix, end);
}

/// pi(a) = lim f_{a_1..a_k}(0). Truncated addresses give the midpoint of
/// the hull f_prefix([0^,1^]) with half its length as the error.
inline Estimate pi(const ContractionSystem& sys, const Address& a) {
  if (a.exact()) {
    if (sys.exact()) return {to_double(pi_exact_tail<Rational>(sys, a)), 0.0};
    return {pi_exact_tail<double>(sys, a), 0.0};
  }
  if (sys.exact()) {
    const Rational lo = sys.apply_word<Rational>(a.prefix, sys.zero_hat_as<Rational>());
    const Rational hi = sys.apply_word<Rational>(a.prefix, sys.one_hat_as<Rational>());
    return {to_double(Rational((lo + hi) / 2)), to_double(Rational((hi - lo) / 2))};
  }
  const double lo = sys.apply_word<double>(a.prefix, sys.zero_hat());
  const double hi = sys.apply_word<double>(a.prefix, sys.one_hat());
  return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

/// Bernoulli shift: drops the first digit.
inline Address shift(const Address& a) {
  if (a.prefix.empty()) {
    if (a.tail == Tail::truncated) throw error(errc::empty_truncated, "nothing left to shift");
    return a;
  }
  return Address{Word(a.prefix.begin() + 1, a.prefix.end()), a.tail};
}

/// Rewrites the Z_b twin (..., m, N, N, ...) with m in N_b to
/// (..., m+1, 0, 0, ...); every other address is returned unchanged.
inline Address canonicalize(const ContractionSystem& sys, const Address& a) {
  sys.check_digits(a.prefix);
  if (a.tail != Tail::constant_n) return a;
  const AmbiguityTable table = ambiguity(sys);
  if (!table.zb_active) return a;
  Word w = a.prefix;
  while (!w.empty() && w.back() == sys.max_digit()) w.pop_back();
  if (w.empty() || !table.contains(w.back())) return a;
  ++w.back();
  return Address{std::move(w), Tail::constant0};
}

/// max over j <= n of |pi(sigma^j a) - T^j(pi(a))|.
inline double commute_check(const ContractionSystem& sys, const Address& a, std::size_t n) {
  if (!a.exact()) throw error(errc::domain_error, "commute check needs an exact tail");
  sys.check_digits(a.prefix);
  auto run = [&]<class T>(T point, double tol) {
    double worst = 0.0;
    Address shifted = a;
    for (std::size_t j = 0;; ++j) {
      const T expected = pi_exact_tail<T>(sys, shifted);
      worst = std::max(worst, std::abs(to_double(T(expected - point))));
      if (j == n) break;
      point = transfer<T>(sys, point, tol).second;
      shifted = shift(shifted);
    }
    return worst;
  };
  if (sys.exact()) return run(pi_exact_tail<Rational>(sys, a), 0.0);
  return run(pi_exact_tail<double>(sys, a), sys.tolerances().inv);
}

}  // namespace ifs
