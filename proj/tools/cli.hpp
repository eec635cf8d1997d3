#pragma once

// Command-line front end. run_cli() is separate from main() so tests can
// drive every subcommand in-process.
//
// Exit codes: 0 ok, 1 verification failure, 2 input/domain error,
// 3 capability error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "qam/qam.hpp"
#include "qam/verify.hpp"

namespace qam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCapability = 3;

inline std::size_t default_grid() {
  if (const char* env = std::getenv("QAM_DEFAULT_GRID")) {
    try {
      return static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      throw DomainError(std::string("QAM_DEFAULT_GRID is not a positive integer: ") + env);
    }
  }
  return 512;
}

struct RunConfig {
  std::string gen;
  std::string gen2;
  std::vector<std::string> gens;
  std::vector<double> vector;
  std::vector<double> interval;
  std::optional<double> margin;
  std::size_t grid = 512;
  double tol = kVerdictTol;
  std::string method = "index";
  unsigned long seed = 42;
  std::string out_spec;
  std::string out_csv;
  std::string example;

  std::optional<Interval> interval_override() const {
    if (interval.empty()) {
      if (margin) throw DomainError("--margin needs --interval");
      return std::nullopt;
    }
    if (interval.size() != 2) throw DomainError("--interval expects a,b");
    return Interval(interval[0], interval[1], margin);
  }

  void validate() const {
    if (grid < 8) throw DomainError(fmt::format("grid size must be >= 8, got {}", grid));
    if (!(tol > 0.0)) throw DomainError(fmt::format("tolerance must be positive, got {}", tol));
  }
};

inline std::string num17(double x) { return fmt::format("{:.17g}", x); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw DomainError("cannot open CSV output '" + path + "'");
  }
  void header(const std::vector<std::string>& cols) { row_strings(cols); }
  void row(const std::vector<double>& vals) {
    std::vector<std::string> s;
    for (double v : vals) s.push_back(num17(v));
    row_strings(s);
  }

 private:
  void row_strings(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open output '" + path + "'");
  out << text << '\n';
}

// ---------------------------------------------------------------------------

inline int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.gen.empty()) throw DomainError("eval needs --gen");
  if (c.vector.empty()) throw DomainError("eval needs --vector");
  const Generator f = load_generator(c.gen, c.interval_override());
  out << fmt::format("{:.12f}\n", qa_mean(f, c.vector));
  return kExitOk;
}

inline int cmd_compare(const RunConfig& c, std::ostream& out) {
  if (c.gen.empty() || c.gen2.empty()) throw DomainError("compare needs --gen and --gen2");
  const auto iv = c.interval_override();
  const Generator f = load_generator(c.gen, iv);
  const Generator g = load_generator(c.gen2, iv);
  const Grid grid = make_grid(f.interval(), c.grid);
  ComparisonResult r;
  if (c.method == "index") {
    r = compare_index(f, g, grid, c.tol);
  } else if (c.method == "convexity") {
    r = compare_convexity(f, g, grid, c.tol);
  } else if (c.method == "ratio") {
    r = compare_ratio(f, g, grid, c.tol);
  } else {
    throw DomainError("unknown --method '" + c.method + "' (index|convexity|ratio)");
  }
  if (r.witness) {
    out << fmt::format("{}, witness≈{:.6g}\n", to_string(r.verdict), *r.witness);
  } else {
    out << to_string(r.verdict) << '\n';
  }
  out << fmt::format("margin: {:.6g}\n", r.margin);
  out << fmt::format("method: {}\n", c.method);
  if (!c.out_csv.empty()) {
    CsvWriter csv(c.out_csv);
    const bool indices = f.smoothness().in_sm() && g.smoothness().in_sm();
    if (indices) {
      csv.header({"x", "A_f", "A_g", "gap"});
    } else {
      csv.header({"x", "gap"});
    }
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      const double x = r.points[i];
      if (indices) {
        csv.row({x, f.index_at(x), g.index_at(x), r.gaps[i]});
      } else {
        csv.row({x, r.gaps[i]});
      }
    }
  }
  return kExitOk;
}

inline std::vector<Generator> lattice_operands(const RunConfig& c, const std::optional<Interval>& iv) {
  std::vector<std::string> paths = c.gens;
  if (!c.gen.empty()) paths.insert(paths.begin(), c.gen);
  if (!c.gen2.empty()) paths.push_back(c.gen2);
  if (paths.empty()) throw DomainError("need operand specs (--gens a.json,b.json or --gen/--gen2)");
  if (paths.size() > kMaxLatticeOperands) throw DomainError(fmt::format("at most {} operands", kMaxLatticeOperands));
  std::vector<Generator> ops;
  for (const auto& p : paths) ops.push_back(load_generator(p, iv));
  return ops;
}

inline void write_lattice_csv(const LatticeResult& r, const std::string& path, std::size_t grid_size) {
  CsvWriter csv(path);
  std::vector<std::string> cols{"x"};
  for (std::size_t i = 0; i < r.operands.size(); ++i) cols.push_back(fmt::format("A{}", i + 1));
  cols.insert(cols.end(), {r.kind == LatticeKind::Join ? "max" : "min", "h", "h_prime"});
  csv.header(cols);
  std::vector<ArrowPrattIndex> idx;
  for (const auto& f : r.operands) idx.push_back(arrow_pratt(f));
  for (double x : make_grid(r.interval, grid_size)) {
    std::vector<double> row{x};
    for (const auto& a : idx) row.push_back(a(x));
    row.push_back(r.index(x));
    row.push_back(r.generator.value(x));
    row.push_back(r.generator.deriv1(x));
    csv.row(row);
  }
}

inline int cmd_lattice(LatticeKind kind, const RunConfig& c, std::ostream& out) {
  const auto iv_override = c.interval_override();
  const auto ops = lattice_operands(c, iv_override);
  const Interval iv = iv_override.value_or(ops.front().interval());
  LatticeOptions opts;
  opts.grid = c.grid;
  const LatticeResult r = kind == LatticeKind::Join ? join(ops, iv, opts) : meet(ops, iv, opts);
  const std::string spec = to_spec_string(r.generator);
  if (c.out_spec.empty()) {
    out << spec << '\n';
  } else {
    write_text(c.out_spec, spec);
    out << fmt::format("{} of {} operands on [{:.6g}, {:.6g}], {} kink(s)\n", to_string(kind), ops.size(),
                       iv.work_lo(), iv.work_hi(), r.index.kinks.size());
    for (double z : r.index.kinks) out << fmt::format("kink: {:.12g}\n", z);
  }
  if (!c.out_csv.empty()) write_lattice_csv(r, c.out_csv, c.grid);
  return kExitOk;
}

inline int cmd_smooth(const RunConfig& c, std::ostream& out) {
  if (c.gen.empty()) throw DomainError("smooth needs --gen <piecewise spec>");
  std::vector<std::string> opp = c.gens;
  if (!c.gen2.empty()) opp.insert(opp.begin(), c.gen2);
  if (opp.empty() || opp.size() > 2) throw DomainError("smooth needs one or two operand specs (--gens f.json,g.json)");
  const auto iv = c.interval_override();
  const PiecewiseGenerator s(load_generator(c.gen, iv));
  const Generator f = load_generator(opp[0], iv);
  const Generator g = opp.size() > 1 ? load_generator(opp[1], iv) : f;
  const SmoothingResult res = smooth_all(s, f, g, 64, c.grid);
  const std::string spec = to_spec_string(res.k);
  if (c.out_spec.empty()) {
    out << spec << '\n';
  } else {
    write_text(c.out_spec, spec);
    out << fmt::format("smoothed {} kink(s)\n", res.steps.size());
  }
  if (!c.out_csv.empty()) {
    CsvWriter csv(c.out_csv);
    csv.header({"step", "kink", "ratio", "max_drop"});
    for (const auto& st : res.steps) csv.row({static_cast<double>(st.step), st.kink, st.ratio, st.max_drop});
  }
  return kExitOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
  out << fmt::format("# seed={} grid={}\n", c.seed, c.grid);
  bool ok = true;
  std::string first;
  for (const auto& r : verify::run_all({c.seed, c.grid})) {
    out << fmt::format("{} {} ({} checks)\n", r.passed ? "PASS" : "FAIL", r.name, r.checks);
    if (!r.passed && ok) first = r.name + ": " + r.counterexample;
    ok = ok && r.passed;
  }
  if (!ok) {
    out << "first counterexample: " << first << '\n';
    return kExitVerifyFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Bundled scenarios.

inline double sin_then_tan(double x) { return x <= 0.0 ? std::sin(x) : std::tan(x); }
inline double tan_then_sin(double x) { return x <= 0.0 ? std::tan(x) : std::sin(x); }

inline int example_sin_tan(LatticeKind kind, const RunConfig& c, std::ostream& out) {
  const double hp = std::numbers::pi / 2;
  const Interval iv(-hp, hp, 0.01);
  const Generator s = Generator::sin(iv);
  const Generator t = Generator::tan(iv);
  LatticeOptions opts;
  opts.grid = c.grid;
  const LatticeResult r = kind == LatticeKind::Join ? join({s, t}, iv, opts) : meet({s, t}, iv, opts);
  const Grid grid = make_grid(iv, c.grid);
  const auto ref = kind == LatticeKind::Join ? sin_then_tan : tan_then_sin;
  const double dev = verify::aligned_deviation(r.generator, ref, grid, -0.5, 0.5);
  out << fmt::format("# {}(sin, tan) on [{:.6g}, {:.6g}]\n", to_string(kind), iv.work_lo(), iv.work_hi());
  out << fmt::format("kinks: {:.6g}\n", fmt::join(r.index.kinks, ", "));
  out << fmt::format("combined index at 0: {:.6g}\n", r.index(0.0));
  out << fmt::format("max deviation from {} after affine alignment: {:.3e}\n",
                     kind == LatticeKind::Join ? "sin|tan" : "tan|sin", dev);
  if (!c.out_csv.empty()) write_lattice_csv(r, c.out_csv, c.grid);
  if (!c.out_spec.empty()) write_text(c.out_spec, to_spec_string(r.generator));
  return dev <= 1e-6 ? kExitOk : kExitVerifyFailed;
}

inline int example_cube(const RunConfig& c, std::ostream& out) {
  const Interval iv(-1.0, 1.0, 0.01);
  const Generator id = Generator::identity(iv);
  const Generator cube = Generator::cube(iv);
  out << "# identity vs cube on [-0.99, 0.99]\n";
  try {
    (void)join({id, cube}, iv);
    out << "join unexpectedly succeeded\n";
    return kExitVerifyFailed;
  } catch (const CapabilityError& e) {
    out << "join: " << e.what() << '\n';
  }
  const auto r = compare_convexity(id, cube, make_grid(iv, c.grid));
  out << fmt::format("compare (convexity): {}, witness≈{:.6g}\n", to_string(r.verdict), r.witness.value_or(0.0));
  out << fmt::format("# seed={}\n", c.seed);
  verify::Rng rng(c.seed);
  std::optional<SampleVector> below, above;
  for (int i = 0; i < 10000 && !(below && above); ++i) {
    const auto v = verify::random_vector(rng, iv);
    const double d = qa_mean(cube, v) - qa_mean(id, v);
    if (d < -1e-6 && !below) below = v;
    if (d > 1e-6 && !above) above = v;
  }
  if (below) out << "cube mean < arithmetic mean on " << verify::show(*below) << '\n';
  if (above) out << "cube mean > arithmetic mean on " << verify::show(*above) << '\n';
  return r.verdict == Verdict::Incomparable && below && above ? kExitOk : kExitVerifyFailed;
}

inline int example_l1(const RunConfig& c, std::ostream& out) {
  const Interval iv(0.5, 2.0);
  const Generator f = Generator::identity(iv);
  verify::Rng rng(c.seed);
  const auto vs = verify::random_vectors(rng, iv, 500);
  out << fmt::format("# power(1+1/n) -> identity on [{:.6g}, {:.6g}], seed={}\n", iv.work_lo(), iv.work_hi(), c.seed);
  out << "n,l1_index_distance,uniform_gap\n";
  std::optional<CsvWriter> csv;
  if (!c.out_csv.empty()) {
    csv.emplace(c.out_csv);
    csv->header({"n", "l1_index_distance", "uniform_gap"});
  }
  for (int n = 1; n <= 20; ++n) {
    const Generator fn = Generator::power(1.0 + 1.0 / n, iv);
    const double l1 = l1_index_distance(fn, f);
    double gap = 0.0;
    for (const auto& v : vs) gap = std::max(gap, std::abs(qa_mean(fn, v) - qa_mean(f, v)));
    out << fmt::format("{},{:.10g},{:.10g}\n", n, l1, gap);
    if (csv) csv->row({static_cast<double>(n), l1, gap});
  }
  return kExitOk;
}

inline int cmd_example(const RunConfig& c, std::ostream& out) {
  if (c.example == "sin-tan-join") return example_sin_tan(LatticeKind::Join, c, out);
  if (c.example == "sin-tan-meet") return example_sin_tan(LatticeKind::Meet, c, out);
  if (c.example == "cube-incomparable") return example_cube(c, out);
  if (c.example == "l1-convergence") return example_l1(c, out);
  throw DomainError("unknown example '" + c.example +
                    "' (sin-tan-join, sin-tan-meet, cube-incomparable, l1-convergence)");
}

// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Quasi-arithmetic means: evaluate, compare, and take joins/meets of generators", "qam"};
  app.require_subcommand(1);
  app.footer(
      "CSV columns:\n"
      "  compare   x,A_f,A_g,gap (x,gap when an operand has no index)\n"
      "  join/meet x,A1..An,max|min,h,h_prime\n"
      "  smooth    step,kink,ratio,max_drop\n"
      "  example l1-convergence   n,l1_index_distance,uniform_gap\n"
      "Exit codes: 0 ok, 1 verification failure, 2 input/domain error, 3 capability error.\n"
      "QAM_DEFAULT_GRID overrides the default grid size (512).");

  try {
    c.grid = default_grid();
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  auto common = [&](CLI::App* sub) {
    sub->add_option("--interval", c.interval, "Override interval: a,b")->delimiter(',')->expected(2);
    sub->add_option("--margin", c.margin, "Interior margin for --interval");
    sub->add_option("--grid", c.grid, "Grid size (>= 8)");
    sub->add_option("--tol", c.tol, "Verdict tolerance");
    sub->add_option("--out-csv", c.out_csv, "CSV output path");
  };
  auto* eval = app.add_subcommand("eval", "Evaluate a quasi-arithmetic mean");
  eval->add_option("--gen", c.gen, "Generator spec file")->required();
  eval->add_option("--vector", c.vector, "Comma-separated sample")->delimiter(',')->required();
  common(eval);

  auto* compare = app.add_subcommand("compare", "Decide f ≺ g");
  compare->add_option("--gen", c.gen)->required();
  compare->add_option("--gen2", c.gen2)->required();
  compare->add_option("--method", c.method, "index | convexity | ratio");
  common(compare);

  std::vector<CLI::App*> lattice_cmds;
  for (const char* name : {"join", "meet"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " of generator specs");
    sub->add_option("--gen", c.gen);
    sub->add_option("--gen2", c.gen2);
    sub->add_option("--gens", c.gens, "Comma-separated spec files")->delimiter(',');
    sub->add_option("--out-spec", c.out_spec, "Result spec path (stdout if omitted)");
    common(sub);
    lattice_cmds.push_back(sub);
  }

  auto* smooth = app.add_subcommand("smooth", "Remove kinks of a piecewise upper bound");
  smooth->add_option("--gen", c.gen, "Piecewise spec")->required();
  smooth->add_option("--gen2", c.gen2, "Operand spec");
  smooth->add_option("--gens", c.gens, "Operand specs f,g")->delimiter(',');
  smooth->add_option("--out-spec", c.out_spec);
  common(smooth);

  auto* verify = app.add_subcommand("verify", "Run the property suites");
  verify->add_option("--seed", c.seed);
  verify->add_option("--grid", c.grid);

  auto* example = app.add_subcommand("example", "Bundled scenarios");
  example->add_option("name", c.example, "sin-tan-join | sin-tan-meet | cube-incomparable | l1-convergence")
      ->required();
  example->add_option("--seed", c.seed);
  example->add_option("--grid", c.grid);
  example->add_option("--out-csv", c.out_csv);
  example->add_option("--out-spec", c.out_spec);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    c.validate();
    if (eval->parsed()) return cmd_eval(c, out);
    if (compare->parsed()) return cmd_compare(c, out);
    if (lattice_cmds[0]->parsed()) return cmd_lattice(LatticeKind::Join, c, out);
    if (lattice_cmds[1]->parsed()) return cmd_lattice(LatticeKind::Meet, c, out);
    if (smooth->parsed()) return cmd_smooth(c, out);
    if (verify->parsed()) return cmd_verify(c, out);
    if (example->parsed()) return cmd_example(c, out);
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCapability;
  } catch (const AccuracyError& e) {
    err << "error: " << e.what() << " (best estimate " << e.estimate() << ")\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::range_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed spec: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace qam::cli
