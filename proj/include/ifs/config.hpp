#pragma once

// Flat `key = value` system definitions.
//
//   # middle-thirds system
//   n_maps = 2
//   map.0.slope = 1/3
//   map.0.intercept = 0
//   map.1.slope = 1/3
//   map.1.intercept = 2/3
//   probabilities = 1/2, 1/2
//
// Numbers are rationals ("2/3") or decimals ("0.25", "1e-3"); both are
// read exactly. A general map is a polynomial with a certified Lipschitz
// bound:
//
//   map.1.kind = poly
//   map.1.coefficients = 0, 1/4, 1/4     # c0 + c1 x + c2 x^2
//   map.1.lipschitz = 3/4
//
// Optional keys: tol_fix, tol_inv, tol_phi, seed.

#include "ifs/invariant_measure.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ifs {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline boost::multiprecision::cpp_int parse_integer(std::string_view s, std::string_view whole) {
  if (s.empty()) throw error(errc::parse_error, "malformed number '" + std::string(whole) + "'");
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw error(errc::parse_error, "malformed number '" + std::string(whole) + "'");
  // A leading zero would select octal.
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return boost::multiprecision::cpp_int(std::string(s));
}

}  // namespace detail

/// Exact value of a rational or decimal literal.
inline Rational parse_number(std::string_view text) {
  using boost::multiprecision::cpp_int;
  const std::string_view whole = detail::trim(text);
  std::string_view s = whole;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational value;
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const cpp_int num = detail::parse_integer(detail::trim(s.substr(0, slash)), whole);
    const cpp_int den = detail::parse_integer(detail::trim(s.substr(slash + 1)), whole);
    if (den == 0) throw error(errc::parse_error, "zero denominator in '" + std::string(whole) + "'");
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = s.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (exp_text.empty() || exp_text.size() > 6)
        throw error(errc::parse_error, "malformed exponent in '" + std::string(whole) + "'");
      for (char c : exp_text)
        if (!std::isdigit(static_cast<unsigned char>(c)))
          throw error(errc::parse_error, "malformed exponent in '" + std::string(whole) + "'");
      exponent = std::stol(std::string(exp_text));
      if (exp_negative) exponent = -exponent;
      s = s.substr(0, e);
    }
    std::string digits;
    const auto dot = s.find('.');
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (int_part.empty() && frac_part.empty())
      throw error(errc::parse_error, "malformed number '" + std::string(whole) + "'");
    digits.append(int_part);
    digits.append(frac_part);
    const cpp_int mantissa = detail::parse_integer(digits, whole);
    exponent -= static_cast<long>(frac_part.size());
    const cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::abs(exponent)));
    value = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
  }
  return negative ? Rational(-value) : value;
}

inline std::vector<Rational> parse_number_list(std::string_view text) {
  std::vector<Rational> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto token = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    out.push_back(parse_number(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct MapSpec {
  enum class Kind { affine, poly } kind = Kind::affine;
  std::optional<Rational> slope;
  std::optional<Rational> intercept;
  std::vector<Rational> coefficients;
  std::optional<Rational> lipschitz;
};

struct RunConfig {
  std::size_t n_maps = 0;
  std::vector<MapSpec> maps;
  std::optional<std::vector<Rational>> probabilities;
  Tolerances tolerances;
  std::uint64_t seed = 7;

  /// Runs the system gate; throws the validation error on failure.
  ContractionSystem system() const {
    std::vector<ContractionMap> out;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const auto& m = maps[i];
      if (m.kind == MapSpec::Kind::affine) {
        out.push_back(ContractionMap::affine(*m.slope, *m.intercept));
        continue;
      }
      std::vector<double> c;
      std::string name = "poly(";
      for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
        c.push_back(to_double(m.coefficients[j]));
        name += (j ? "," : "") + to_string(m.coefficients[j]);
      }
      name += ")";
      out.push_back(ContractionMap::general(
          [c](double x) {
            double acc = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
            return acc;
          },
          to_double(*m.lipschitz), name));
    }
    return ContractionSystem::validate(std::move(out), tolerances);
  }

  /// Runs the probability gate.
  ProbabilityVector probability_vector() const {
    if (!probabilities) throw error(errc::parse_error, "config has no 'probabilities' entry");
    return ProbabilityVector(*probabilities);
  }
};

inline RunConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw error(errc::parse_error, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(detail::trim(view.substr(0, eq)));
    const std::string value(detail::trim(view.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw error(errc::parse_error, "line " + std::to_string(line_no) + ": empty key or value");
    if (!entries.emplace(key, value).second)
      throw error(errc::parse_error, "line " + std::to_string(line_no) + ": duplicate key " + key);
  }

  RunConfig cfg;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    std::string v = it->second;
    entries.erase(it);
    return v;
  };

  const auto n_maps = take("n_maps");
  if (!n_maps) throw error(errc::parse_error, "missing n_maps");
  const Rational n = parse_number(*n_maps);
  if (denominator(n) != 1 || n < 1 || n > 1000) throw error(errc::parse_error, "bad n_maps");
  cfg.n_maps = numerator(n).convert_to<std::size_t>();

  for (std::size_t i = 0; i < cfg.n_maps; ++i) {
    const std::string prefix = "map." + std::to_string(i) + ".";
    MapSpec spec;
    if (const auto kind = take(prefix + "kind")) {
      if (*kind == "poly") {
        spec.kind = MapSpec::Kind::poly;
      } else if (*kind != "affine") {
        throw error(errc::parse_error, prefix + "kind must be affine or poly");
      }
    }
    if (spec.kind == MapSpec::Kind::affine) {
      const auto slope = take(prefix + "slope");
      const auto intercept = take(prefix + "intercept");
      if (!slope || !intercept) throw error(errc::parse_error, prefix + "slope/intercept missing");
      spec.slope = parse_number(*slope);
      spec.intercept = parse_number(*intercept);
    } else {
      const auto coefficients = take(prefix + "coefficients");
      const auto lipschitz = take(prefix + "lipschitz");
      if (!coefficients || !lipschitz)
        throw error(errc::parse_error, prefix + "coefficients/lipschitz missing");
      spec.coefficients = parse_number_list(*coefficients);
      spec.lipschitz = parse_number(*lipschitz);
    }
    cfg.maps.push_back(std::move(spec));
  }
  if (const auto p = take("probabilities")) cfg.probabilities = parse_number_list(*p);
  if (const auto t = take("tol_fix")) cfg.tolerances.fix = to_double(parse_number(*t));
  if (const auto t = take("tol_inv")) cfg.tolerances.inv = to_double(parse_number(*t));
  if (const auto t = take("tol_phi")) cfg.tolerances.phi = to_double(parse_number(*t));
  if (const auto s = take("seed")) {
    const Rational seed = parse_number(*s);
    if (denominator(seed) != 1 || seed < 0) throw error(errc::parse_error, "seed must be a nonnegative integer");
    cfg.seed = numerator(seed).convert_to<std::uint64_t>();
  }
  if (!entries.empty()) throw error(errc::parse_error, "unknown key " + entries.begin()->first);
  return cfg;
}

inline RunConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot open " + path);
  return parse_config(in);
}

}  // namespace ifs
