#pragma once

// Shared vocabulary: exact rationals, digits and words, error codes and the
// default tolerances used across the library.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace ifs {

using Rational = boost::multiprecision::cpp_rational;

using Digit = std::uint32_t;
using Word = std::vector<Digit>;

enum class errc {
  ordering_violation,
  cover_violation,
  not_contractive,
  malformed_map,
  digit_out_of_range,
  out_of_image,
  depth_too_large,
  domain_error,
  not_in_attractor,
  empty_truncated,
  bad_probability,
  last_digit_is_n,
  mixed_systems,
  duplicate_vectors,
  vectors_equal,
  bad_weights,
  parse_error,
  io_error,
};

inline constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::ordering_violation: return "OrderingViolation";
    case errc::cover_violation: return "CoverViolation";
    case errc::not_contractive: return "NotContractive";
    case errc::malformed_map: return "MalformedMap";
    case errc::digit_out_of_range: return "DigitOutOfRange";
    case errc::out_of_image: return "OutOfImage";
    case errc::depth_too_large: return "DepthTooLarge";
    case errc::domain_error: return "DomainError";
    case errc::not_in_attractor: return "NotInAttractor";
    case errc::empty_truncated: return "EmptyTruncated";
    case errc::bad_probability: return "BadProbability";
    case errc::last_digit_is_n: return "LastDigitIsN";
    case errc::mixed_systems: return "MixedSystems";
    case errc::duplicate_vectors: return "DuplicateVectors";
    case errc::vectors_equal: return "VectorsEqual";
    case errc::bad_weights: return "BadWeights";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

struct Tolerances {
  double fix = 1e-13;  // fixed-point iteration and tail snapping
  double inv = 1e-12;  // inverse of a general map
  double phi = 1e-10;  // truncation of the address series
};

inline constexpr std::size_t kDefaultIntervalCap = std::size_t{1} << 20;

/// A double together with an absolute error bound.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double d) { return d; }

/// Exact rational value of a finite double.
inline Rational to_rational(double d) {
  if (!std::isfinite(d)) throw error(errc::domain_error, "non-finite value");
  int exp = 0;
  double mant = std::frexp(d, &exp);
  // 53 bits of mantissa as an integer, then scale by the binary exponent.
  auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r{boost::multiprecision::cpp_int(m)};
  if (exp > 0) {
    r *= Rational{boost::multiprecision::cpp_int(1) << exp};
  } else if (exp < 0) {
    r /= Rational{boost::multiprecision::cpp_int(1) << (-exp)};
  }
  return r;
}

inline std::string to_string(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

// Scalar helpers used by the templated algorithms. Exact arithmetic ignores
// the tolerance argument.
template <class T>
T abs_value(const T& v) {
  if constexpr (is_exact_v<T>) {
    return v < 0 ? T(-v) : v;
  } else {
    return std::abs(v);
  }
}

template <class T>
bool near(const T& a, const T& b, double tol) {
  if constexpr (is_exact_v<T>) {
    return a == b;
  } else {
    return std::abs(a - b) <= tol;
  }
}

template <class T>
T from_double(double d) {
  if constexpr (is_exact_v<T>) {
    return to_rational(d);
  } else {
    return d;
  }
}

inline std::string word_to_string(const Word& w, char sep = '.') {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(w[i]);
  }
  return s;
}

}  // namespace ifs
