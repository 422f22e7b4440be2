// ifs: command-line front end.
//
// Exit status: 0 success, 1 a check or command failed, 2 the system or the
// weight vector was rejected, 3 the configuration could not be read.

#include "ifs/analysis.hpp"
#include "ifs/coding.hpp"
#include "ifs/config.hpp"
#include "ifs/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum Status { kOk = 0, kCheckFailed = 1, kInvalid = 2, kParseFailed = 3 };

struct Options {
  std::string config;
  std::size_t grid = 100;
  std::size_t depth = 0;  // 0: command default
  std::size_t samples = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> tol;
  bool json = false;
  std::vector<std::string> points;
  std::vector<std::string> extra_p;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int status_for(ifs::errc code) {
  switch (code) {
    case ifs::errc::parse_error:
    case ifs::errc::io_error:
      return kParseFailed;
    case ifs::errc::ordering_violation:
    case ifs::errc::cover_violation:
    case ifs::errc::not_contractive:
    case ifs::errc::malformed_map:
    case ifs::errc::bad_probability:
      return kInvalid;
    default:
      return kCheckFailed;
  }
}

// Writes to --out when given, stdout otherwise. Output files are opened in
// binary mode so that line endings stay LF.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ifs::error(ifs::errc::io_error, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (file_ && !*file_) throw ifs::error(ifs::errc::io_error, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct Loaded {
  ifs::RunConfig config;
  ifs::ContractionSystem system;
};

Loaded load(const Options& o) {
  ifs::RunConfig cfg = ifs::load_config(o.config);
  if (o.tol) cfg.tolerances.phi = *o.tol;
  if (o.seed) cfg.seed = *o.seed;
  auto sys = cfg.system();
  return {std::move(cfg), std::move(sys)};
}

ifs::SolutionPhi solution(const Loaded& l) {
  auto p = l.config.probability_vector();
  ifs::check_compatible(l.system, p);
  return ifs::SolutionPhi(l.system, std::move(p), l.config.tolerances.phi);
}

int cmd_validate(const Options& o) {
  const Loaded l = load(o);
  const auto& sys = l.system;
  std::optional<ifs::ProbabilityVector> p;
  if (l.config.probabilities) {
    p.emplace(l.config.probability_vector());
    ifs::check_compatible(sys, *p);
  }
  const auto table = ifs::ambiguity(sys);
  const auto gap = sys.first_level_gap();

  nlohmann::json j;
  j["status"] = "valid";
  j["maps"] = sys.size();
  j["exact"] = sys.exact();
  std::string zero_hat = fmt17(sys.zero_hat());
  std::string one_hat = fmt17(sys.one_hat());
  if (sys.exact()) {
    zero_hat = ifs::to_string(sys.zero_hat_as<ifs::Rational>());
    one_hat = ifs::to_string(sys.one_hat_as<ifs::Rational>());
  }
  j["zero_hat"] = zero_hat;
  j["one_hat"] = one_hat;
  nlohmann::json images = nlohmann::json::array();
  for (ifs::Digit n = 0; n < sys.size(); ++n) {
    if (sys.exact()) {
      images.push_back({ifs::to_string(sys.apply(n, ifs::Rational(0))),
                        ifs::to_string(sys.apply(n, ifs::Rational(1)))});
    } else {
      images.push_back({fmt17(sys.apply(n, 0.0)), fmt17(sys.apply(n, 1.0))});
    }
  }
  j["images"] = images;
  j["nb"] = table.nb;
  j["zb_active"] = table.zb_active;
  if (gap) j["d"] = ifs::to_string(*gap);
  if (p) j["probabilities"] = p->to_string();

  Sink sink(o.out);
  auto& os = sink.stream();
  if (o.json) {
    os << j.dump(2) << '\n';
  } else {
    os << "valid: " << sys.size() << " maps" << (sys.exact() ? " (exact)" : "") << '\n';
    for (ifs::Digit n = 0; n < sys.size(); ++n)
      os << "f_" << n << "[0,1] = [" << images[n][0].get<std::string>() << ", "
         << images[n][1].get<std::string>() << "]  " << sys.map(n).name() << '\n';
    os << "0^ = " << zero_hat << '\n' << "1^ = " << one_hat << '\n';
    os << "N_b = {";
    for (std::size_t i = 0; i < table.nb.size(); ++i) os << (i ? ", " : "") << table.nb[i];
    os << "}\n" << "zb_active = " << (table.zb_active ? "true" : "false") << '\n';
    if (gap) os << "d = " << ifs::to_string(*gap) << '\n';
    if (p) os << "p = " << p->to_string() << '\n';
  }
  sink.finish();
  return kOk;
}

int cmd_curve(const Options& o) {
  const Loaded l = load(o);
  const auto sol = solution(l);
  Sink sink(o.out);
  auto& os = sink.stream();
  if (o.json) {
    const std::size_t depth = o.depth ? o.depth : 3;
    const auto report = ifs::gaps<double>(l.system, depth);
    nlohmann::json table = nlohmann::json::array();
    for (const auto& g : report.gaps) {
      const auto pv = ifs::plateau(sol, g.digits);
      nlohmann::json row{{"digits", ifs::word_to_string(g.digits)},
                         {"left", pv.left},
                         {"right", pv.right},
                         {"value", pv.value}};
      if (pv.exact_value) row["exact_value"] = ifs::to_string(*pv.exact_value);
      table.push_back(row);
    }
    os << table.dump(2) << '\n';
  } else {
    if (o.grid < 2) throw ifs::error(ifs::errc::domain_error, "grid must be >= 2");
    os << "x,phi\n";
    for (std::size_t i = 0; i <= o.grid; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(o.grid);
      os << fmt17(x) << ',' << fmt17(sol(x).value) << '\n';
    }
  }
  sink.finish();
  return kOk;
}

int cmd_gaps(const Options& o) {
  const Loaded l = load(o);
  const std::size_t depth = o.depth ? o.depth : 3;
  const auto report = ifs::gaps<double>(l.system, depth);
  Sink sink(o.out);
  auto& os = sink.stream();
  if (o.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : report.gaps) arr.push_back({g.left, g.right});
    os << arr.dump() << '\n';
  } else {
    os << "depth,left,right,digits\n";
    for (const auto& g : report.gaps)
      os << g.depth() << ',' << fmt17(g.left) << ',' << fmt17(g.right) << ','
         << ifs::word_to_string(g.digits) << '\n';
  }
  sink.finish();
  return kOk;
}

int cmd_attractor(const Options& o) {
  const Loaded l = load(o);
  const std::size_t depth = o.depth ? o.depth : 4;
  const auto set = ifs::level_set<double>(l.system, depth);
  Sink sink(o.out);
  auto& os = sink.stream();
  if (o.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& iv : set.intervals()) arr.push_back({iv.left, iv.right});
    os << arr.dump() << '\n';
  } else {
    os << "left,right\n";
    for (const auto& iv : set.intervals()) os << fmt17(iv.left) << ',' << fmt17(iv.right) << '\n';
  }
  sink.finish();
  return kOk;
}

template <class T>
std::string describe(const ifs::Verdict<T>& v) {
  if (const auto* f = std::get_if<ifs::InFlank>(&v)) return f->side == ifs::Side::left ? "left flank" : "right flank";
  if (const auto* g = std::get_if<ifs::InGap<T>>(&v)) return "gap " + ifs::word_to_string(g->gap.digits);
  if (const auto* a = std::get_if<ifs::InAttractorCylinder>(&v)) return "attractor " + ifs::to_string(a->address);
  return "undecided " + ifs::word_to_string(std::get<ifs::Undecided>(v).digits);
}

int cmd_eval(const Options& o) {
  const Loaded l = load(o);
  const auto sol = solution(l);
  const std::size_t depth = o.depth ? o.depth : 64;
  Sink sink(o.out);
  auto& os = sink.stream();
  nlohmann::json rows = nlohmann::json::array();
  if (!o.json) os << "x,phi,error,location\n";
  for (const auto& text : o.points) {
    const ifs::Rational x = ifs::parse_number(text);
    if (x < 0 || x > 1) throw ifs::error(ifs::errc::domain_error, "x outside [0,1]: " + text);
    const ifs::Estimate e = l.system.exact() ? sol(x) : sol(ifs::to_double(x));
    const std::string where = l.system.exact() ? describe(ifs::locate(l.system, x, depth))
                                               : describe(ifs::locate(l.system, ifs::to_double(x), depth));
    std::optional<std::string> exact;
    if (sol.rational_mode()) {
      const auto v = sol.exact_at(x);
      if (v.error == 0) exact = ifs::to_string(v.value);
    }
    if (o.json) {
      nlohmann::json row{{"x", text}, {"phi", e.value}, {"error", e.error}, {"location", where}};
      if (exact) row["exact"] = *exact;
      rows.push_back(row);
    } else {
      os << text << ',' << (exact ? *exact : fmt17(e.value)) << ',' << fmt17(e.error) << ',' << where << '\n';
    }
  }
  if (o.json) os << rows.dump(2) << '\n';
  sink.finish();
  return kOk;
}

int cmd_verify(const Options& o) {
  const Loaded l = load(o);
  const auto sol = solution(l);
  ifs::VerifyOptions opt;
  if (o.depth) opt.depth = o.depth;
  if (o.samples) opt.samples = o.samples;
  opt.seed = l.config.seed;
  if (o.grid != 100) opt.grid = o.grid;
  const auto report = ifs::run_verification(sol, opt);
  Sink sink(o.out);
  auto& os = sink.stream();
  if (o.json) {
    auto j = report.to_json();
    j["seed"] = opt.seed;
    j["depth"] = opt.depth;
    j["samples"] = opt.samples;
    os << j.dump(2) << '\n';
  } else {
    for (const auto& g : report.groups) os << (g.pass ? "PASS " : "FAIL ") << g.name << '\n';
    os << (report.pass() ? "all checks passed" : "failing:");
    for (const auto& name : report.failing()) os << ' ' << name;
    os << '\n';
  }
  sink.finish();
  return report.pass() ? kOk : kCheckFailed;
}

int cmd_independence(const Options& o) {
  const Loaded l = load(o);
  std::vector<ifs::ProbabilityVector> ps;
  if (l.config.probabilities) ps.push_back(l.config.probability_vector());
  for (const auto& text : o.extra_p) ps.emplace_back(ifs::parse_number_list(text));
  for (const auto& p : ps) ifs::check_compatible(l.system, p);
  const std::size_t grid = o.grid != 100 ? o.grid : std::max<std::size_t>(8, ps.size() + 2);
  const auto report = ifs::independence_rank(l.system, ps, grid);
  Sink sink(o.out);
  auto& os = sink.stream();
  if (o.json) {
    os << report.to_json().dump(2) << '\n';
  } else {
    os << "vectors: " << ps.size() << "\ngrid: " << grid << "\nsingular values:";
    for (double s : report.singular_values) os << ' ' << fmt17(s);
    os << "\nrank: " << report.rank << '\n';
  }
  sink.finish();
  return report.rank == ps.size() ? kOk : kCheckFailed;
}

int cmd_sample(const Options& o) {
  const Loaded l = load(o);
  const auto p = l.config.probability_vector();
  ifs::check_compatible(l.system, p);
  const std::size_t count = o.samples ? o.samples : 1000;
  const std::size_t depth = o.depth ? o.depth : 32;
  ifs::DigitSampler sampler(p, l.config.seed);
  Sink sink(o.out);
  auto& os = sink.stream();
  nlohmann::json rows = nlohmann::json::array();
  if (!o.json) os << "x,address\n";
  for (std::size_t i = 0; i < count; ++i) {
    const ifs::Address a{sampler.word(depth), ifs::Tail::truncated};
    const double x = ifs::pi(l.system, a).value;
    if (o.json) {
      rows.push_back({{"x", x}, {"address", ifs::to_string(a)}});
    } else {
      os << fmt17(x) << ',' << ifs::to_string(a) << '\n';
    }
  }
  if (o.json) os << rows.dump() << '\n';
  sink.finish();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attractors, invariant measures and singular solutions of interval IFS"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "system definition file")->required();
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--tol", o.tol, "phi tolerance");
    sub->add_flag("--json", o.json, "JSON output");
  };

  auto* validate = app.add_subcommand("validate", "check a system definition");
  common(validate);
  auto* curve = app.add_subcommand("curve", "tabulate phi on a uniform grid");
  common(curve);
  curve->add_option("--grid", o.grid, "grid intervals")->check(CLI::PositiveNumber);
  curve->add_option("--depth", o.depth, "plateau depth for --json");
  auto* gaps = app.add_subcommand("gaps", "list gaps up to a depth");
  common(gaps);
  gaps->add_option("--depth", o.depth, "maximum gap depth");
  auto* attractor = app.add_subcommand("attractor", "level set A_k");
  common(attractor);
  attractor->add_option("--depth", o.depth, "level k");
  auto* eval = app.add_subcommand("eval", "evaluate phi at points");
  common(eval);
  eval->add_option("x", o.points, "points in [0,1], decimal or p/q")->required();
  eval->add_option("--depth", o.depth, "location search depth");
  auto* verify = app.add_subcommand("verify", "run the property checks");
  common(verify);
  verify->add_option("--depth", o.depth, "geometry and coding depth");
  verify->add_option("--samples", o.samples, "Monte Carlo samples");
  verify->add_option("--seed", o.seed, "random seed");
  verify->add_option("--grid", o.grid, "residual grid");
  auto* independence = app.add_subcommand("independence", "numerical rank of several solutions");
  common(independence);
  independence->add_option("--p", o.extra_p, "additional weight vector, e.g. \"1/3, 2/3\"");
  independence->add_option("--grid", o.grid, "number of plateau grid points");
  auto* sample = app.add_subcommand("sample", "draw points of the attractor under mu");
  common(sample);
  sample->add_option("--samples", o.samples, "number of points");
  sample->add_option("--depth", o.depth, "digits per point");
  sample->add_option("--seed", o.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseFailed;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*curve) return cmd_curve(o);
    if (*gaps) return cmd_gaps(o);
    if (*attractor) return cmd_attractor(o);
    if (*eval) return cmd_eval(o);
    if (*verify) return cmd_verify(o);
    if (*independence) return cmd_independence(o);
    if (*sample) return cmd_sample(o);
  } catch (const ifs::error& e) {
    std::cerr << e.what() << '\n';
    return status_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kCheckFailed;
}
