// klpath: Kloosterman sums, paths and the limiting random series from the
// command line. Exit codes: 0 ok, 1 failed verification, 2 usage,
// 3 unsupported regime, 4 resource guard.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "klpath/errors.hpp"
#include "klpath/io.hpp"
#include "klpath/kloosterman.hpp"
#include "klpath/parallel.hpp"
#include "klpath/random_series.hpp"
#include "klpath/report.hpp"
#include "klpath/statistics.hpp"
#include "klpath/verify.hpp"

using nlohmann::json;
using namespace klpath;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRegime = 3;
constexpr int kExitResource = 4;

constexpr std::uint64_t kMaxPathModulus = 100'000'000;
constexpr std::uint64_t kMaxNaiveModulus = 1'000'000'000;
constexpr std::uint64_t kMaxMomentModulus = 10'000'000;

struct Common {
  std::uint64_t p = 3;
  unsigned n = 2;
  std::int64_t a = 1;
  std::int64_t b = 1;
};

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::ostream* open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return &std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw PreconditionViolated("cannot open " + path + " for writing");
  return &file;
}

int cmd_sum(const Common& c, const std::string& method) {
  Stopwatch clock;
  const PrimePowerModulus mod(c.p, c.n);
  const KloostermanParams params(mod, c.a, c.b);
  json out = {{"command", "sum"},
              {"config", {{"p", c.p}, {"n", c.n}, {"a", c.a}, {"b", c.b}, {"method", method},
                          {"threads", default_thread_count()}}}};
  std::optional<Complex> naive;
  std::optional<double> closed;
  if (method == "closed" || method == "both") closed = kl_closed(params);
  if (method == "naive" || method == "both") {
    if (mod.q() > kMaxNaiveModulus) throw ResourceLimit("naive summation is limited to q <= 1e9");
    naive = kl_naive(params);
  }
  if (naive) out["naive"] = complex_json(*naive);
  if (closed) out["closed"] = *closed;
  out["value"] = closed ? *closed : naive->real();
  if (naive && closed) out["max_abs_diff"] = std::abs(*naive - Complex(*closed));
  out["seconds"] = clock.seconds();
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_path(const Common& c, const std::string& csv, const std::string& svg, bool rotate) {
  Stopwatch clock;
  const PrimePowerModulus mod(c.p, c.n);
  if (mod.q() > kMaxPathModulus) throw ResourceLimit("paths are limited to q <= 1e8");
  const KloostermanParams params(mod, c.a, c.b);
  const auto points = partial_sums(params);
  const bool csv_to_stdout = csv == "-" || (csv.empty() && svg.empty());
  if (!csv.empty() || csv_to_stdout) {
    std::ofstream file;
    write_path_csv(*open_or_stdout(csv_to_stdout ? "-" : csv, file), points);
  }
  if (!svg.empty()) {
    std::vector<Complex> vertices;
    vertices.reserve(points.size());
    for (const auto& pt : points) vertices.push_back(pt.value);
    std::ofstream file;
    write_path_svg(*open_or_stdout(svg, file), vertices, SvgOptions{.rotate = rotate});
  }
  const json summary = {{"command", "path"},
                        {"config", {{"p", c.p}, {"n", c.n}, {"a", params.a}, {"b", params.b}, {"csv", csv},
                                    {"svg", svg}, {"rotate", rotate}}},
                        {"vertices", points.size()},
                        {"end", complex_json(points.back().value)},
                        {"seconds", clock.seconds()}};
  // Keep stdout pure CSV when the vertices go there.
  (csv_to_stdout ? std::cerr : std::cout) << summary.dump(2) << '\n';
  return 0;
}

int cmd_series(int truncation, std::uint64_t samples, unsigned grid_size, std::vector<double> grid,
               std::uint64_t seed, const std::string& out_path) {
  if (truncation < 1 || samples < 1) throw PreconditionViolated("H and samples must be at least 1");
  if (grid.empty()) {
    if (grid_size < 1) throw PreconditionViolated("grid must have at least one point");
    if (grid_size == 1) {
      grid = {1.0};
    } else {
      for (unsigned g = 0; g < grid_size; ++g) grid.push_back(static_cast<double>(g) / (grid_size - 1));
    }
  }
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("grid points must lie in [0, 1]");
  }
  const auto paths = series_sample_paths(grid, truncation, samples, seed);
  std::ofstream file;
  write_series_csv(*open_or_stdout(out_path, file), grid, paths, truncation, seed);
  if (!out_path.empty() && out_path != "-") {
    std::cout << json{{"command", "series"},
                      {"config", {{"H", truncation}, {"samples", samples}, {"grid", grid.size()}, {"seed", seed},
                                  {"out", out_path}}}}
                     .dump(2)
              << '\n';
  }
  return 0;
}

int cmd_moments(const Common& c, const MomentSpec& spec, bool use_step) {
  Stopwatch clock;
  const PrimePowerModulus mod(c.p, c.n);
  if (mod.q() > kMaxMomentModulus) throw ResourceLimit("moments are limited to q <= 1e7");
  const Complex value = empirical_moment(spec, mod, use_step);
  const json out = {{"command", "moments"},
                    {"config", {{"p", c.p}, {"n", c.n}, {"t", spec.t}, {"conj", spec.conj_powers},
                                {"powers", spec.powers}, {"b0", spec.b0}, {"step", use_step},
                                {"threads", default_thread_count()}}},
                    {"value", complex_json(value)},
                    {"seconds", clock.seconds()}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_verify(const std::string& suite, bool as_json, std::uint64_t seed) {
  const auto reports = run_suite(suite, seed);
  const bool pass = all_pass(reports);
  if (as_json) {
    const json out = {{"command", "verify"},
                      {"config", {{"suite", suite}, {"seed", seed}, {"threads", default_thread_count()}}},
                      {"pass", pass},
                      {"reports", reports}};
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "suite=" << suite << " seed=" << seed << " threads=" << default_thread_count() << '\n';
    for (const auto& r : reports) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.observed.dump() << '\n';
    }
  }
  return pass ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kloosterman sums, paths and random series modulo odd prime powers"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: KLPATH_THREADS or all cores)");

  auto add_common = [](CLI::App* sub, Common& c, bool with_ab) {
    sub->add_option("--p", c.p, "odd prime")->required();
    sub->add_option("--n", c.n, "exponent")->required();
    if (with_ab) {
      sub->add_option("--a", c.a, "first argument");
      sub->add_option("--b", c.b, "second argument");
    }
  };

  Common sum_cfg;
  std::string method = "closed";
  auto* sum = app.add_subcommand("sum", "normalised Kloosterman sum");
  add_common(sum, sum_cfg, true);
  sum->add_option("--method", method)->check(CLI::IsMember({"naive", "closed", "both"}));

  Common path_cfg;
  std::string csv;
  std::string svg;
  bool rotate = false;
  auto* path = app.add_subcommand("path", "Kloosterman path as CSV and/or SVG");
  add_common(path, path_cfg, true);
  path->add_option("--csv", csv, "CSV output file ('-' for stdout)");
  path->add_option("--svg", svg, "SVG output file");
  path->add_flag("--rotate", rotate, "quarter turn before drawing");

  int truncation = 1024;
  std::uint64_t samples = 1;
  unsigned grid_size = 512;
  std::vector<double> grid;
  std::uint64_t series_seed = kDefaultSeed;
  std::string series_out;
  auto* series = app.add_subcommand("series", "sample paths of the truncated random series");
  series->add_option("--H", truncation, "truncation order");
  series->add_option("--samples", samples, "number of realisations");
  series->add_option("--grid", grid_size, "number of equispaced points in [0, 1]");
  series->add_option("--t", grid, "explicit grid points (overrides --grid)");
  series->add_option("--seed", series_seed);
  series->add_option("--out", series_out, "output file (default stdout)");

  Common moment_cfg;
  MomentSpec spec;
  bool use_step = false;
  auto* moments = app.add_subcommand("moments", "empirical path moment averaged over a");
  add_common(moments, moment_cfg, false);
  moments->add_option("--t", spec.t, "strictly increasing times in [0, 1]")->required();
  moments->add_option("--conj", spec.conj_powers, "conjugate powers m_i")->required();
  moments->add_option("--powers", spec.powers, "powers n_i")->required();
  moments->add_option("--b0", spec.b0);
  moments->add_flag("--step", use_step, "use the step function instead of the path");

  std::string suite = "all";
  bool as_json = false;
  std::uint64_t verify_seed = kDefaultSeed;
  auto* verify = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> choices = suite_names();
  choices.push_back("all");
  verify->add_option("--suite", suite)->check(CLI::IsMember(choices));
  verify->add_flag("--json", as_json);
  verify->add_option("--seed", verify_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (threads > 0) set_default_thread_count(threads);
    if (*sum) return cmd_sum(sum_cfg, method);
    if (*path) return cmd_path(path_cfg, csv, svg, rotate);
    if (*series) return cmd_series(truncation, samples, grid_size, grid, series_seed, series_out);
    if (*moments) return cmd_moments(moment_cfg, spec, use_step);
    if (*verify) return cmd_verify(suite, as_json, verify_seed);
  } catch (const UnsupportedRegime& e) {
    std::cerr << "unsupported regime: " << e.what() << '\n';
    return kExitRegime;
  } catch (const ResourceLimit& e) {
    std::cerr << "resource guard: " << e.what() << '\n';
    return kExitResource;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
