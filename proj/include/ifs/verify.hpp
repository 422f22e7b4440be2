#pragma once

// Runs every property check on one system and weight vector and collects
// the outcome as nine named groups.

#include "ifs/analysis.hpp"
#include "ifs/coding.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ifs {

struct VerifyOptions {
  std::size_t depth = 8;         // geometry, mass and coding depth
  std::size_t samples = 100000;  // Monte Carlo sample count
  std::uint64_t seed = 7;
  std::size_t grid = 1000;       // residual sweep points
};

struct CheckGroup {
  std::string name;
  bool pass = true;
  nlohmann::json detail = nlohmann::json::object();
};

struct VerifyReport {
  std::vector<CheckGroup> groups;

  bool pass() const {
    return std::all_of(groups.begin(), groups.end(), [](const CheckGroup& g) { return g.pass; });
  }

  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const auto& g : groups)
      if (!g.pass) out.push_back(g.name);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& g : groups) list.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    return {{"groups", list}, {"pass", pass()}};
  }
};

namespace detail {

// Largest k <= wanted with (N+1)^k <= cap.
inline std::size_t affordable_depth(const ContractionSystem& sys, std::size_t wanted, std::size_t cap) {
  std::size_t k = 0;
  std::size_t count = 1;
  while (k < wanted && count * sys.size() <= cap) {
    count *= sys.size();
    ++k;
  }
  return k;
}

// The depth-k hulls f_w([0^, 1^]) in lexicographic order.
template <class T>
std::vector<Interval<T>> hulls(const ContractionSystem& sys, std::size_t k) {
  std::vector<Interval<T>> level{{sys.zero_hat_as<T>(), sys.one_hat_as<T>()}};
  for (std::size_t depth = 0; depth < k; ++depth) {
    std::vector<Interval<T>> next;
    next.reserve(level.size() * sys.size());
    for (Digit n = 0; n < sys.size(); ++n)
      for (const auto& iv : level) next.push_back({sys.apply(n, iv.left), sys.apply(n, iv.right)});
    level = std::move(next);
  }
  return level;
}

// Drops trailing prefix digits that repeat the tail digit.
inline Address trim_tail(const ContractionSystem& sys, Address a) {
  if (!a.exact()) return a;
  const Digit tail_digit = a.tail == Tail::constant0 ? 0 : sys.max_digit();
  while (!a.prefix.empty() && a.prefix.back() == tail_digit) a.prefix.pop_back();
  return a;
}

// First `length` digits of an address, padding with its tail digit.
inline Word expand(const ContractionSystem& sys, const Address& a, std::size_t length) {
  Word w = a.prefix;
  if (a.exact()) {
    const Digit tail_digit = a.tail == Tail::constant0 ? 0 : sys.max_digit();
    while (w.size() < length) w.push_back(tail_digit);
  }
  if (w.size() > length) w.resize(length);
  return w;
}

inline Address random_address(const ContractionSystem& sys, std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<Digit> digit(0, sys.max_digit());
  Address a;
  a.prefix.resize(len(rng));
  for (auto& d : a.prefix) d = digit(rng);
  a.tail = (rng() & 1U) ? Tail::constant_n : Tail::constant0;
  return a;
}

template <class T>
void check_geometry(const ContractionSystem& sys, std::size_t depth, CheckGroup& nesting,
                    CheckGroup& gap_group) {
  const std::size_t k_max = affordable_depth(sys, depth, std::size_t{1} << 16);
  nlohmann::json lengths = nlohmann::json::array();
  auto previous = level_set<T>(sys, 0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    auto current = level_set<T>(sys, k);
    const bool nested = current.subset_of(previous);
    const bool strict = current.total_length() < previous.total_length();
    bool closed_form = true;
    if constexpr (is_exact_v<T>) closed_form = current.total_length() == measure_bound_exact(sys, k);
    lengths.push_back({{"k", k}, {"length", to_double(current.total_length())}, {"nested", nested},
                       {"strict", strict}, {"closed_form", closed_form}});
    nesting.pass = nesting.pass && nested && strict && closed_form;
    previous = std::move(current);
  }
  nesting.detail = {{"levels", lengths}};

  // Gaps of depth <= g avoid the depth-g hulls, and hulls plus gaps tile [0^, 1^].
  const std::size_t g = std::min<std::size_t>(k_max, 10);
  const auto report = gaps<T>(sys, g);
  const auto hull_set = IntervalSet<T>::from_sorted(hulls<T>(sys, g));
  bool disjoint = true;
  T gap_total{0};
  for (const auto& gap : report.gaps) {
    disjoint = disjoint && hull_set.disjoint_from_open(gap.left, gap.right);
    gap_total += gap.right - gap.left;
  }
  const T span = sys.one_hat_as<T>() - sys.zero_hat_as<T>();
  const T covered = T(hull_set.total_length() + gap_total);
  bool tiles = false;
  if constexpr (is_exact_v<T>) {
    tiles = covered == span;
  } else {
    tiles = std::abs(covered - span) <= 1e-9;
  }
  gap_group.pass = disjoint && tiles;
  gap_group.detail = {{"depth", g},
                      {"gap_count", report.gaps.size()},
                      {"disjoint_from_hulls", disjoint},
                      {"hull_length", to_double(hull_set.total_length())},
                      {"gap_length", to_double(gap_total)},
                      {"span", to_double(span)},
                      {"decomposition_holds", tiles},
                      {"exact", is_exact_v<T>}};
}

}  // namespace detail

inline VerifyReport run_verification(const SolutionPhi& sol, const VerifyOptions& opt = {}) {
  const auto& sys = sol.system();
  const auto& p = sol.probabilities();
  VerifyReport report;

  {
    CheckGroup g{"boundary"};
    const auto b = boundary_report(sol);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : b.checks)
      list.push_back({{"check", c.name}, {"value", c.value}, {"expected", c.expected},
                      {"exact", c.exact}, {"pass", c.pass}});
    g.pass = b.all_pass();
    g.detail = {{"checks", list}};
    report.groups.push_back(std::move(g));
  }

  {
    CheckGroup g{"residual"};
    const double bound = static_cast<double>(2 * sys.size() + 1) * sol.tolerance();
    double worst = 0.0;
    double worst_x = 0.0;
    const std::size_t grid = std::max<std::size_t>(opt.grid, 1);
    for (std::size_t i = 0; i <= grid; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(grid);
      const double r = std::abs(equation_residual(sol, x).value);
      if (r > worst) {
        worst = r;
        worst_x = x;
      }
    }
    g.pass = worst <= bound;
    g.detail = {{"grid", grid}, {"max_residual", worst}, {"at", worst_x}, {"bound", bound}};
    report.groups.push_back(std::move(g));
  }

  {
    CheckGroup nesting{"nesting"};
    CheckGroup gap_group{"gaps"};
    if (sys.exact()) {
      detail::check_geometry<Rational>(sys, opt.depth, nesting, gap_group);
    } else {
      detail::check_geometry<double>(sys, opt.depth, nesting, gap_group);
    }
    report.groups.push_back(std::move(nesting));
    report.groups.push_back(std::move(gap_group));
  }

  {
    CheckGroup g{"mass"};
    const std::size_t k_max = detail::affordable_depth(sys, opt.depth, std::size_t{1} << 16);
    nlohmann::json sums = nlohmann::json::array();
    for (std::size_t k = 1; k <= k_max; ++k) {
      bool ok = false;
      double total = 0.0;
      if (p.exact()) {
        Rational s = 0;
        for (const auto& m : level_masses<Rational>(p, k)) s += m;
        ok = s == 1;
        total = to_double(s);
      } else {
        for (double m : level_masses<double>(p, k)) total += m;
        ok = std::abs(total - 1.0) <= 1e-12;
      }
      sums.push_back({{"k", k}, {"sum", total}, {"pass", ok}});
      g.pass = g.pass && ok;
    }
    // Gaps and flanks carry no mass.
    nlohmann::json null_sets = nlohmann::json::array();
    auto null_check = [&]<class T, class M>() {
      const auto found = gaps<T>(sys, std::min<std::size_t>(k_max, 3));
      std::vector<Interval<T>> open_sets{found.left_flank, found.right_flank};
      for (const auto& gap : found.gaps) open_sets.push_back({gap.left, gap.right});
      for (const auto& iv : open_sets) {
        if (!(iv.right > iv.left)) continue;
        const auto m = interval_mass_as<T, M>(sys, p, iv.left, iv.right, k_max);
        const bool ok = m.lower == 0 && m.upper == 0;
        null_sets.push_back({{"interval", {to_double(iv.left), to_double(iv.right)}},
                             {"mass", {to_double(m.lower), to_double(m.upper)}},
                             {"pass", ok}});
        g.pass = g.pass && ok;
      }
    };
    if (sys.exact()) {
      null_check.template operator()<Rational, double>();
    } else {
      null_check.template operator()<double, double>();
    }
    g.detail = {{"level_sums", sums}, {"null_sets", null_sets}, {"atom_bound", atom_bound(p, k_max)}};
    report.groups.push_back(std::move(g));
  }

  {
    CheckGroup g{"preservation"};
    std::vector<Word> targets;
    for (Digit n = 0; n < sys.size(); ++n) targets.push_back({n});
    targets.push_back({0, sys.max_digit()});
    targets.push_back({sys.max_digit(), 0});
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto r = preservation_check(sys, p, targets[i], opt.samples, opt.seed + i);
      runs.push_back(r.to_json());
      g.pass = g.pass && r.within_tolerance();
    }
    g.detail = {{"runs", runs}};
    report.groups.push_back(std::move(g));
  }

  {
    CheckGroup g{"mixing"};
    struct Case {
      Word a, b;
      std::size_t lag;
    };
    const Digit last = sys.max_digit();
    const std::vector<Case> cases{{{0}, {last}, 2}, {{last, 0}, {0, last}, 3}, {{1}, {0, 1}, 5}};
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto& c = cases[i];
      const auto r = mixing_estimate(sys, p, c.a, c.b, c.lag, opt.samples, opt.seed + 100 + i);
      const bool product_ok = std::abs(r.exact_joint - r.product) <= 4 * 1e-16 * std::max(r.product, 1e-300);
      const bool ok = product_ok && r.monte_carlo.within_tolerance();
      auto j = r.monte_carlo.to_json();
      j["exact_joint"] = r.exact_joint;
      j["product"] = r.product;
      j["product_matches"] = product_ok;
      runs.push_back(j);
      g.pass = g.pass && ok;
    }
    g.detail = {{"runs", runs}};
    report.groups.push_back(std::move(g));
  }

  std::mt19937_64 rng(opt.seed);
  const std::size_t max_len = std::clamp<std::size_t>(opt.depth, 1, sys.exact() ? 12 : 6);

  {
    CheckGroup g{"commute"};
    const double bound = 10.0 * sys.tolerances().inv;
    double worst = 0.0;
    std::string worst_address;
    const std::size_t count = 50;
    for (std::size_t i = 0; i < count; ++i) {
      const Address a = canonicalize(sys, detail::random_address(sys, rng, max_len));
      const double dev = commute_check(sys, a, std::min<std::size_t>(10, a.prefix.size() + 2));
      if (dev >= worst) {
        worst = dev;
        worst_address = to_string(a);
      }
    }
    g.pass = worst < bound;
    g.detail = {{"addresses", count}, {"max_deviation", worst}, {"worst_address", worst_address},
                {"bound", bound}};
    report.groups.push_back(std::move(g));
  }

  {
    CheckGroup g{"coding"};
    const std::size_t count = 200;
    std::size_t failures = 0;
    std::string first_failure;
    for (std::size_t i = 0; i < count; ++i) {
      const Address a = detail::random_address(sys, rng, max_len);
      const Address expected = detail::trim_tail(sys, canonicalize(sys, a));
      bool ok = false;
      if (sys.exact()) {
        const Rational x = pi_exact_tail<Rational>(sys, a);
        ok = detail::trim_tail(sys, extract_address<Rational>(sys, x, 256)) == expected;
      } else {
        const double x = pi_exact_tail<double>(sys, a);
        const std::size_t length = a.prefix.size() + 2;
        const Address back = extract_address<double>(sys, x, length);
        ok = detail::expand(sys, back, length) == detail::expand(sys, expected, length);
      }
      if (!ok && failures++ == 0) first_failure = to_string(a);
    }
    const AmbiguityTable table = ambiguity(sys);
    nlohmann::json twins = nlohmann::json::array();
    bool twins_ok = true;
    if (table.zb_active) {
      for (Digit n : table.nb) {
        for (const Word& prefix : {Word{}, Word{0}, Word{sys.max_digit()}}) {
          Address left{prefix, Tail::constant_n};
          left.prefix.push_back(n);
          Address right{prefix, Tail::constant0};
          right.prefix.push_back(n + 1);
          double diff = 0.0;
          bool same_point = false;
          if (p.exact() && sys.exact()) {
            diff = to_double(Rational(address_value<Rational>(p, left) - address_value<Rational>(p, right)));
            same_point = pi_exact_tail<Rational>(sys, left) == pi_exact_tail<Rational>(sys, right);
          } else {
            diff = address_value<double>(p, left) - address_value<double>(p, right);
            same_point = std::abs(pi(sys, left).value - pi(sys, right).value) <= sys.tolerances().fix;
          }
          const bool ok = std::abs(diff) < 1e-12 && same_point &&
                          canonicalize(sys, left) == Address{right.prefix, Tail::constant0};
          twins.push_back({{"addresses", {to_string(left), to_string(right)}},
                           {"series_difference", diff},
                           {"same_point", same_point},
                           {"pass", ok}});
          twins_ok = twins_ok && ok;
        }
      }
    }
    g.pass = failures == 0 && twins_ok;
    g.detail = {{"round_trips", count},
                {"round_trip_failures", failures},
                {"first_failure", first_failure},
                {"zb_active", table.zb_active},
                {"nb", table.nb},
                {"twins", twins}};
    report.groups.push_back(std::move(g));
  }

  return report;
}

}  // namespace ifs
