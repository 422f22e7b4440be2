#pragma once

// Finite witnesses for the structure of the solution family: numerical
// rank of sampled solutions, separation of the invariant measures of two
// weight vectors, and membership of convex combinations in the solution
// class.

#include "ifs/solution.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace ifs {

struct SampleMatrix {
  std::vector<double> grid;
  Eigen::MatrixXd values;  // rows: solutions, columns: grid points
};

struct RankReport {
  std::vector<ProbabilityVector> p_vectors;
  SampleMatrix samples;
  std::vector<double> singular_values;
  double threshold = 0.0;
  std::size_t rank = 0;

  nlohmann::json to_json() const {
    nlohmann::json ps = nlohmann::json::array();
    for (const auto& p : p_vectors) ps.push_back(p.values());
    return {{"p_vectors", ps},
            {"grid", samples.grid},
            {"singular_values", singular_values},
            {"threshold", threshold},
            {"rank", rank}};
  }
};

inline constexpr double kRankThreshold = 1e-8;

/// The first `count` midpoints of non-degenerate gaps, by depth and then
/// lexicographically. phi is exactly a plateau constant at each of them.
inline std::vector<double> plateau_grid(const ContractionSystem& sys, std::size_t count) {
  std::vector<double> grid;
  for (std::size_t depth = 1; grid.size() < count; ++depth) {
    // gaps() lists every depth up to `depth`; keep only the deepest.
    if (sys.exact()) {
      const auto report = gaps<Rational>(sys, depth);
      for (const auto& g : report.gaps)
        if (g.depth() == depth) grid.push_back(to_double((g.left + g.right) / 2));
    } else {
      const auto report = gaps<double>(sys, depth);
      for (const auto& g : report.gaps)
        if (g.depth() == depth) grid.push_back(0.5 * (g.left + g.right));
    }
  }
  grid.resize(count);
  return grid;
}

inline SampleMatrix sample_matrix(const ContractionSystem& sys,
                                  const std::vector<ProbabilityVector>& p_vectors,
                                  const std::vector<double>& grid) {
  SampleMatrix m;
  m.grid = grid;
  m.values.resize(static_cast<Eigen::Index>(p_vectors.size()),
                  static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < p_vectors.size(); ++i) {
    const SolutionPhi phi(sys, p_vectors[i]);
    for (std::size_t j = 0; j < grid.size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = phi(grid[j]).value;
  }
  return m;
}

/// Numerical rank of [phi_p(x_j)] over distinct weight vectors p, with
/// singular values below 1e-8 * sigma_max treated as zero.
inline RankReport independence_rank(const ContractionSystem& sys,
                                    const std::vector<ProbabilityVector>& p_vectors,
                                    std::size_t grid_size) {
  if (p_vectors.empty()) throw error(errc::domain_error, "need at least one weight vector");
  if (grid_size < p_vectors.size() + 2)
    throw error(errc::domain_error, "grid must have at least count + 2 points");
  for (std::size_t i = 0; i < p_vectors.size(); ++i) {
    check_compatible(sys, p_vectors[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (p_vectors[i].values() == p_vectors[j].values())
        throw error(errc::duplicate_vectors, "weight vectors " + std::to_string(j) + " and " +
                                                 std::to_string(i) + " coincide");
  }
  RankReport report;
  report.p_vectors = p_vectors;
  report.samples = sample_matrix(sys, p_vectors, plateau_grid(sys, grid_size));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(report.samples.values);
  const auto& sv = svd.singularValues();
  report.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double largest = report.singular_values.empty() ? 0.0 : report.singular_values.front();
  report.threshold = kRankThreshold * largest;
  report.rank = static_cast<std::size_t>(
      std::count_if(report.singular_values.begin(), report.singular_values.end(),
                    [&](double s) { return s > report.threshold; }));
  return report;
}

/// mu_p and mu_q of S_p, the union of depth-k cylinders whose digit counts
/// are more likely under p than under q. Cylinders with a tied likelihood
/// belong to neither side; their masses are reported separately.
struct SeparationReport {
  double mass_p_on_sp = 0.0;
  double mass_q_on_sp = 0.0;
  double tie_mass_p = 0.0;
  double tie_mass_q = 0.0;
};

inline SeparationReport singularity_probe(const ContractionSystem& sys, const ProbabilityVector& p,
                                          const ProbabilityVector& q, std::size_t k) {
  check_compatible(sys, p);
  check_compatible(sys, q);
  if (k < 1) throw error(errc::domain_error, "depth must be >= 1");
  if (p.values() == q.values()) throw error(errc::vectors_equal, "p and q coincide");

  const std::size_t parts = p.size();
  std::vector<double> log_p(parts), log_q(parts);
  double scale = 0.0;
  for (std::size_t n = 0; n < parts; ++n) {
    log_p[n] = std::log(p[static_cast<Digit>(n)]);
    log_q[n] = std::log(q[static_cast<Digit>(n)]);
    scale = std::max(scale, std::abs(log_p[n] - log_q[n]));
  }
  const double tie_tol = 1e-12 * scale * static_cast<double>(k);

  // Cylinder masses depend only on digit counts: enumerate the count
  // classes (compositions of k into N+1 parts).
  SeparationReport out;
  std::vector<std::size_t> counts(parts, 0);
  auto visit = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
    if (index + 1 == parts) {
      counts[index] = remaining;
      double log_multinomial = std::lgamma(static_cast<double>(k) + 1.0);
      double lp = 0.0;
      double lq = 0.0;
      for (std::size_t n = 0; n < parts; ++n) {
        const auto c = static_cast<double>(counts[n]);
        log_multinomial -= std::lgamma(c + 1.0);
        lp += c * log_p[n];
        lq += c * log_q[n];
      }
      const double mass_p = std::exp(log_multinomial + lp);
      const double mass_q = std::exp(log_multinomial + lq);
      const double ratio = lp - lq;
      if (std::abs(ratio) <= tie_tol) {
        out.tie_mass_p += mass_p;
        out.tie_mass_q += mass_q;
      } else if (ratio > 0.0) {
        out.mass_p_on_sp += mass_p;
        out.mass_q_on_sp += mass_q;
      }
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  visit(visit, 0, k);
  return out;
}

struct ConvexReport {
  bool monotone = false;
  double value_at_0 = 0.0;
  double value_at_1 = 0.0;
  bool boundary_exact = false;  // checked in exact arithmetic
  bool boundary_ok = false;
  double max_residual = 0.0;
  double residual_bound = 0.0;

  bool pass() const { return monotone && boundary_ok && max_residual <= residual_bound; }
};

/// Checks that sum_i w_i phi_{p_i} with w_i >= 0, sum w_i = 1 is again an
/// increasing solution with phi(0) = 0 and phi(1) = 1.
inline ConvexReport convex_member_check(const ContractionSystem& sys,
                                        const std::vector<ProbabilityVector>& p_vectors,
                                        const std::vector<Rational>& weights, std::size_t grid) {
  if (weights.size() != p_vectors.size() || weights.empty())
    throw error(errc::bad_weights, "one weight per vector is required");
  Rational sum = 0;
  for (const auto& w : weights) {
    if (w < 0) throw error(errc::bad_weights, "weights must be nonnegative");
    sum += w;
  }
  if (sum != 1) throw error(errc::bad_weights, "weights sum to " + to_string(sum));
  if (grid < 1) throw error(errc::domain_error, "grid must be >= 1");

  std::vector<SolutionPhi> solutions;
  double tol = 0.0;
  for (const auto& p : p_vectors) {
    solutions.emplace_back(sys, p);
    tol = std::max(tol, solutions.back().tolerance());
  }
  const Combination combined(std::move(solutions), weights, Rational(0));

  ConvexReport report;
  report.monotone = combined.monotone_on_grid(grid);
  const auto exact0 = combined.exact_at(Rational(0));
  const auto exact1 = combined.exact_at(Rational(1));
  report.boundary_exact = exact0.has_value() && exact1.has_value();
  report.value_at_0 = exact0 ? to_double(*exact0) : combined(0.0).value;
  report.value_at_1 = exact1 ? to_double(*exact1) : combined(1.0).value;
  if (report.boundary_exact) {
    report.boundary_ok = *exact0 == 0 && *exact1 == 1;
  } else {
    report.boundary_ok = std::abs(report.value_at_0) <= tol && std::abs(report.value_at_1 - 1.0) <= tol;
  }

  report.residual_bound = static_cast<double>(2 * sys.size() + 1) * tol;
  for (std::size_t i = 0; i <= grid; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid);
    // Equation (E) for the combination; alpha0 = 0 makes the n = 0 term of
    // sum phi(f_n(0)) vanish, so this is the same residual.
    auto run = [&](const auto& xt) {
      using T = std::decay_t<decltype(xt)>;
      double r = combined(xt).value;
      for (Digit n = 0; n < sys.size(); ++n) {
        r -= combined(sys.apply(n, xt)).value;
        r += combined(sys.apply(n, T(0))).value;
      }
      return r;
    };
    const double r = sys.exact() ? run(to_rational(x)) : run(x);
    report.max_residual = std::max(report.max_residual, std::abs(r));
  }
  return report;
}

inline ConvexReport convex_member_check(const ContractionSystem& sys,
                                        const std::vector<ProbabilityVector>& p_vectors,
                                        const std::vector<double>& weights, std::size_t grid) {
  std::vector<Rational> exact;
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw error(errc::bad_weights, "weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw error(errc::bad_weights, "weights must sum to 1");
  // Renormalise the exact binary values so that they sum to one exactly.
  Rational exact_sum = 0;
  for (double w : weights) {
    exact.push_back(to_rational(w));
    exact_sum += exact.back();
  }
  for (auto& w : exact) w /= exact_sum;
  return convex_member_check(sys, p_vectors, exact, grid);
}

}  // namespace ifs
