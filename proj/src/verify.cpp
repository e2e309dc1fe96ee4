#include "klpath/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klpath/errors.hpp"
#include "klpath/io.hpp"
#include "klpath/kloosterman.hpp"
#include "klpath/modular.hpp"
#include "klpath/parallel.hpp"
#include "klpath/random_series.hpp"
#include "klpath/statistics.hpp"

namespace klpath {

namespace {

// Uniform integer in [lo, hi].
std::uint64_t uniform_int(CounterRng& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng.next() % (hi - lo + 1);
}

std::uint64_t random_unit(CounterRng& rng, const PrimePowerModulus& mod) {
  while (true) {
    const std::uint64_t x = uniform_int(rng, 1, mod.q() - 1);
    if (mod.is_unit(x)) return x;
  }
}

IntervalSpec random_interval(CounterRng& rng, const PrimePowerModulus& mod) {
  while (true) {
    const std::uint64_t lo = uniform_int(rng, 1, mod.q() - 1);
    const std::uint64_t hi = uniform_int(rng, lo, mod.q() - 1);
    if (hi > lo || mod.is_unit(lo)) return {lo, hi};
  }
}

// Complete sums Kl(a, 1) for every unit a in increasing order.
std::vector<double> unit_sums(const PrimePowerModulus& mod) {
  std::vector<double> out(mod.phi());
  for_each_block(mod.phi(), 4096, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t r = begin; r < end; ++r) {
      out[r] = kl_value(KloostermanParams(mod, static_cast<std::int64_t>(unit_at(r + 1, mod.p())), 1));
    }
  });
  return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"oracle",       "moments",   "ks",     "completion",
                                                 "hensel",       "fourth-moment", "tightness", "distribution",
                                                 "series",       "performance"};
  return names;
}

bool all_pass(const std::vector<ExperimentReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const ExperimentReport& r) { return r.pass; });
}

std::vector<ExperimentReport> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "all") {
    std::vector<ExperimentReport> out;
    for (const auto& s : suite_names()) {
      auto part = run_suite(s, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (name == "oracle") return verify_oracle();
  if (name == "moments") return verify_moments();
  if (name == "ks") return verify_ks();
  if (name == "completion") return verify_completion(seed);
  if (name == "hensel") return verify_hensel();
  if (name == "fourth-moment") return verify_fourth_moment(seed);
  if (name == "tightness") return verify_tightness(seed);
  if (name == "distribution") return verify_distribution(seed);
  if (name == "series") return verify_series(seed);
  if (name == "performance") return verify_performance();
  throw PreconditionViolated("unknown suite: " + name);
}

std::vector<ExperimentReport> verify_oracle() {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "oracle";
  report.tolerance = 1e-9;
  report.provenance = "closed form against direct summation over every pair of units";
  const std::vector<std::pair<std::uint64_t, unsigned>> moduli = {{3, 2}, {3, 3}, {5, 2}, {5, 3},
                                                                  {7, 2}, {11, 2}, {13, 2}};
  report.params = {{"moduli", nlohmann::json::array()}};
  double worst_diff = 0.0;
  double worst_imag = 0.0;
  double worst_abs = 0.0;
  std::uint64_t pairs = 0;
  for (const auto& [p, n] : moduli) {
    const PrimePowerModulus mod(p, n);
    report.params["moduli"].push_back(mod.q());
    std::vector<std::uint64_t> units;
    for (std::uint64_t x = 1; x < mod.q(); ++x) {
      if (mod.is_unit(x)) units.push_back(x);
    }
    for (std::uint64_t a : units) {
      for (std::uint64_t b : units) {
        const KloostermanParams params(mod, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b));
        const Complex naive = kl_naive(params);
        const double closed = kl_closed(params);
        worst_diff = std::max(worst_diff, std::abs(closed - naive.real()));
        worst_imag = std::max(worst_imag, std::abs(naive.imag()));
        worst_abs = std::max(worst_abs, std::abs(closed));
        ++pairs;
      }
    }
  }
  report.observed = {{"max_abs_diff", worst_diff}, {"max_abs_imag", worst_imag}, {"max_abs_closed", worst_abs},
                     {"pairs", pairs}};
  report.reference = {{"max_abs_diff", 0.0}, {"max_abs_imag", 0.0}, {"bound", 2.0}};
  report.pass = worst_diff <= 1e-9 && worst_imag <= 1e-9 && worst_abs <= 2.0 + 1e-12;
  report.seconds = clock.seconds();
  return {report};
}

std::vector<ExperimentReport> verify_moments() {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "moments";
  report.provenance = "moments of mu: binom(m, m/2) / 2 for even m, 0 for odd m";
  const PrimePowerModulus mod(499, 2);
  report.params = {{"p", 499}, {"n", 2}, {"b0", 1}, {"t", 1.0}};
  const std::vector<double> t = {1.0};
  const auto values = path_value_matrix(t, 1, mod);
  const std::vector<unsigned> zero = {0};
  const std::vector<double> tolerance = {0.05, 0.05, 0.10, 0.15, 0.0, 0.60};
  report.pass = true;
  for (unsigned m = 1; m <= 6; ++m) {
    if (m == 5) continue;
    const std::vector<unsigned> power = {m};
    const Complex moment = moment_from_values(values, zero, power);
    const double expected = mu_moment(m);
    const double tol = tolerance[m - 1];
    const std::string key = "M" + std::to_string(m);
    report.observed[key] = moment.real();
    report.reference[key] = {{"value", expected}, {"tolerance", tol}};
    report.pass = report.pass && std::abs(moment - expected) <= tol;
  }
  report.tolerance = 0.60;
  report.seconds = clock.seconds();
  return {report};
}

std::vector<ExperimentReport> verify_ks() {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "ks";
  report.provenance = "complete sums Kl(a, 1) mod 499^2 against the law mu";
  report.tolerance = 0.05;
  const PrimePowerModulus mod(499, 2);
  report.params = {{"p", 499}, {"n", 2}, {"b0", 1}};
  auto values = unit_sums(mod);
  const auto zeros = static_cast<std::uint64_t>(std::count(values.begin(), values.end(), 0.0));
  std::sort(values.begin(), values.end());
  const double ks = ks_statistic(values, mu_cdf, mu_cdf_left);
  report.observed = {{"zero_count", zeros}, {"units", mod.phi()}, {"ks", ks}};
  report.reference = {{"zero_count", mod.phi() / 2}, {"ks", 0.05}};
  report.pass = 2 * zeros == mod.phi() && ks <= 0.05;
  report.seconds = clock.seconds();
  return {report};
}

std::vector<ExperimentReport> verify_completion(std::uint64_t seed) {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "completion";
  report.provenance = "step function summed directly and rebuilt from complete sums";
  constexpr std::uint64_t kTrials = 200;
  report.params = {{"trials", kTrials}, {"seed", seed}};
  report.tolerance = 1e-8;
  const std::vector<std::pair<std::uint64_t, unsigned>> moduli = {{3, 2}, {5, 2}, {3, 3}, {7, 2},
                                                                  {11, 2}, {5, 3}, {13, 2}};
  double worst_scaled = 0.0;
  double worst = 0.0;
  bool pass = true;
  for (std::uint64_t i = 0; i < kTrials; ++i) {
    CounterRng rng(seed, i);
    const auto& [p, n] = moduli[rng.next() % moduli.size()];
    const PrimePowerModulus mod(p, n);
    const auto a = random_unit(rng, mod);
    const auto b = random_unit(rng, mod);
    const double t = 1.0 - rng.uniform();
    const KloostermanParams params(mod, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b));
    const double diff = std::abs(completed_step(t, params, StepMethod::direct) -
                                 completed_step(t, params, StepMethod::completion));
    const double allowed = 1e-8 * (1.0 + std::log(static_cast<double>(mod.q())));
    worst = std::max(worst, diff);
    worst_scaled = std::max(worst_scaled, diff / allowed);
    pass = pass && diff <= allowed;
  }
  report.observed = {{"max_abs_diff", worst}, {"max_diff_over_allowed", worst_scaled}};
  report.reference = {{"allowed", "1e-8 (1 + log q)"}};
  report.pass = pass;
  report.seconds = clock.seconds();
  return {report};
}

std::vector<ExperimentReport> verify_hensel() {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "hensel";
  report.provenance = "root census of X^2 - (pi + 1) X + pi against lifted root lists";
  report.params = {{"primes", {3, 5, 7}}, {"max_n", 6}};
  std::uint64_t checked = 0;
  std::uint64_t mismatches = 0;
  nlohmann::json first_mismatch;
  for (std::uint64_t p : {3, 5, 7}) {
    for (unsigned n = 1; n <= 6; ++n) {
      const PrimePowerModulus mod(p, n);
      for (std::uint64_t pi = 1; pi < mod.q(); pi += p) {
        const auto s = static_cast<std::int64_t>(pi);
        const IntPolynomial f({s, -(s + 1), 1});
        const auto lifted = hensel_lift_roots(f, p, n).size();
        const auto closed = count_quadratic_roots_closed(s, mod);
        ++checked;
        if (lifted != closed) {
          if (mismatches == 0) first_mismatch = {{"p", p}, {"n", n}, {"pi", pi}, {"lifted", lifted}, {"closed", closed}};
          ++mismatches;
        }
      }
    }
  }
  report.observed = {{"checked", checked}, {"mismatches", mismatches}};
  if (mismatches > 0) report.observed["first_mismatch"] = first_mismatch;
  report.reference = {{"mismatches", 0}};
  report.pass = mismatches == 0;
  report.seconds = clock.seconds();
  return {report};
}

std::vector<ExperimentReport> verify_fourth_moment(std::uint64_t seed) {
  std::vector<ExperimentReport> out;
  {
    Stopwatch clock;
    ExperimentReport report;
    report.name = "fourth-moment-agreement";
    report.provenance = "direct double average against the quadruple-count expansion";
    report.tolerance = 1e-12;
    report.params = {{"moduli", {9, 25, 27, 49}}, {"intervals", 20}, {"seed", seed}};
    double worst = 0.0;
    std::uint64_t stream = 0;
    for (const auto& [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 2}, {5, 2}, {3, 3}, {7, 2}}) {
      const PrimePowerModulus mod(p, n);
      for (int i = 0; i < 20; ++i) {
        CounterRng rng(seed, stream++);
        const auto interval = random_interval(rng, mod);
        const double direct = fourth_moment(interval, mod, FourthMomentAlgorithm::direct);
        const double counting = fourth_moment(interval, mod, FourthMomentAlgorithm::counting);
        worst = std::max(worst, std::abs(direct - counting) / std::max(std::abs(counting), 1e-300));
      }
    }
    report.observed = {{"max_relative_diff", worst}};
    report.reference = {{"max_relative_diff", 0.0}};
    report.pass = worst <= 1e-12;
    report.seconds = clock.seconds();
    out.push_back(report);
  }
  {
    Stopwatch clock;
    ExperimentReport report;
    report.name = "fourth-moment-bound";
    report.provenance = "M4 phi^2 / (n |I|^2) against an empirical cap";
    report.tolerance = 32.0;
    report.params = {{"moduli", {121, 169, 343}}, {"intervals", 50}, {"seed", seed}};
    double worst = 0.0;
    nlohmann::json per_modulus = nlohmann::json::object();
    std::uint64_t stream = 1000;
    for (const auto& [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{11, 2}, {13, 2}, {7, 3}}) {
      const PrimePowerModulus mod(p, n);
      double local = 0.0;
      for (int i = 0; i < 50; ++i) {
        CounterRng rng(seed, stream++);
        const auto interval = random_interval(rng, mod);
        const auto size = static_cast<double>(interval.members(mod).size());
        const double m4 = fourth_moment(interval, mod, FourthMomentAlgorithm::counting);
        const double phi = static_cast<double>(mod.phi());
        local = std::max(local, m4 * phi * phi / (static_cast<double>(n) * size * size));
      }
      per_modulus[std::to_string(mod.q())] = local;
      worst = std::max(worst, local);
    }
    report.observed = {{"max_ratio", worst}, {"per_modulus", per_modulus}};
    report.reference = {{"cap", 32.0}};
    report.pass = worst <= 32.0;
    report.seconds = clock.seconds();
    out.push_back(report);
  }
  return out;
}

std::vector<ExperimentReport> verify_tightness(std::uint64_t seed) {
  std::vector<ExperimentReport> out;
  for (const auto& [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{7, 2}, {11, 2}}) {
    auto report = tightness_sweep(PrimePowerModulus(p, n), 100, seed);
    report.name = "tightness-" + std::to_string(p * p);
    out.push_back(report);
  }
  return out;
}

std::vector<ExperimentReport> verify_distribution(std::uint64_t seed) {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "distribution";
  report.provenance = "path moments mod 199^2 against E|X(t)|^2 = t and the random series";
  constexpr int kTruncation = 1024;
  constexpr std::uint64_t kSamples = 200'000;
  const PrimePowerModulus mod(199, 2);
  const std::vector<double> t = {0.25, 0.5, 0.75};
  report.params = {{"p", 199}, {"n", 2}, {"b0", 1}, {"t", t}, {"H", kTruncation}, {"N", kSamples}, {"seed", seed}};
  report.tolerance = 0.05;
  const auto values = path_value_matrix(t, 1, mod);
  bool pass = true;
  nlohmann::json second = nlohmann::json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double m2 = values.col(static_cast<Eigen::Index>(i)).cwiseAbs2().mean();
    second.push_back({{"t", t[i]}, {"mean_abs2", m2}});
    pass = pass && std::abs(m2 - t[i]) <= 0.03;
  }
  const std::vector<double> joint_t = {0.25, 0.75};
  const std::vector<unsigned> conj_powers = {1, 0};
  const std::vector<unsigned> powers = {0, 1};
  Eigen::MatrixXcd pair(values.rows(), 2);
  pair.col(0) = values.col(0);
  pair.col(1) = values.col(2);
  const Complex empirical = moment_from_values(pair, conj_powers, powers);
  const auto mc = series_moment_mc(joint_t, conj_powers, powers, kTruncation, kSamples, seed);
  const double gap = std::abs(empirical - mc.estimate);
  pass = pass && gap <= 0.05;
  report.observed = {{"second_moments", second},
                     {"joint_empirical", {empirical.real(), empirical.imag()}},
                     {"joint_series", {mc.estimate.real(), mc.estimate.imag()}},
                     {"joint_series_std_error", mc.std_error},
                     {"joint_gap", gap}};
  report.reference = {{"second_moment", "t, within 0.03"}, {"joint", "series estimate, within 0.05"}};
  report.pass = pass;
  report.seconds = clock.seconds();
  return {report};
}

std::vector<ExperimentReport> verify_series(std::uint64_t seed) {
  std::vector<ExperimentReport> out;
  {
    Stopwatch clock;
    ExperimentReport report;
    report.name = "mu-sampler";
    report.provenance = "sample moments of mu against binom(m, m/2) / 2";
    constexpr std::uint64_t kSamples = 1'000'000;
    report.params = {{"N", kSamples}, {"seed", seed}, {"max_m", 8}};
    report.tolerance = 4.0;
    std::vector<double> xs(kSamples);
    CounterRng rng(seed, 0);
    for (auto& x : xs) x = mu_sample(rng);
    bool pass = true;
    double worst = 0.0;
    nlohmann::json per = nlohmann::json::array();
    for (unsigned m = 1; m <= 8; ++m) {
      CompensatedSum s1;
      CompensatedSum s2;
      for (double x : xs) {
        const double y = std::pow(x, static_cast<double>(m));
        s1.add(y);
        s2.add(y * y);
      }
      const double n = static_cast<double>(kSamples);
      const double mean = s1.value() / n;
      const double var = std::max(0.0, s2.value() / n - mean * mean);
      const double se = std::sqrt(var / n);
      const double z = se > 0 ? std::abs(mean - mu_moment(m)) / se : 0.0;
      worst = std::max(worst, z);
      pass = pass && z <= 4.0;
      per.push_back({{"m", m}, {"mean", mean}, {"expected", mu_moment(m)}, {"std_error", se}, {"z", z}});
    }
    report.observed = {{"moments", per}, {"max_z", worst}};
    report.reference = {{"max_z", 4.0}};
    report.pass = pass;
    report.seconds = clock.seconds();
    out.push_back(report);
  }
  {
    Stopwatch clock;
    ExperimentReport report;
    report.name = "truncation-decay";
    report.provenance = "mean |Kl_2H(t) - Kl_H(t)| fitted against C H^e";
    const std::vector<int> truncations = {64, 128, 256, 512, 1024, 2048, 4096};
    constexpr std::uint64_t kRealisations = 10'000;
    constexpr double kT = 0.3;
    report.params = {{"t", kT}, {"H", truncations}, {"realisations", kRealisations}, {"seed", seed}};
    const auto decay = truncation_decay(kT, truncations, kRealisations, seed);
    report.observed = {{"mean_gap", decay.mean_gap}, {"exponent", decay.exponent}, {"constant", decay.constant}};
    report.reference = {{"exponent", -0.5}, {"range", {-0.65, -0.35}}};
    report.tolerance = 0.15;
    report.pass = decay.exponent >= -0.65 && decay.exponent <= -0.35;
    report.seconds = clock.seconds();
    out.push_back(report);
  }
  return out;
}

std::vector<ExperimentReport> verify_performance() {
  std::vector<ExperimentReport> out;
  {
    ExperimentReport report;
    report.name = "performance-closed-form";
    report.provenance = "every closed-form sum Kl(a, 1) mod 997^2 on one thread";
    report.tolerance = 5.0;
    const PrimePowerModulus mod(997, 2);
    report.params = {{"p", 997}, {"n", 2}, {"threads", 1}};
    Stopwatch clock;
    CompensatedSum checksum;
    for (std::uint64_t j = 1; j <= mod.phi(); ++j) {
      checksum.add(kl_closed(KloostermanParams(mod, static_cast<std::int64_t>(unit_at(j, mod.p())), 1)));
    }
    report.seconds = clock.seconds();
    report.observed = {{"seconds", report.seconds}, {"sums", mod.phi()}, {"checksum", checksum.value()}};
    report.reference = {{"seconds", 5.0}};
    report.pass = report.seconds < 5.0;
    out.push_back(report);
  }
  {
    ExperimentReport report;
    report.name = "performance-svg";
    report.provenance = "path of (1, 1) mod 67^2 rendered as SVG";
    report.tolerance = 1.0;
    report.params = {{"p", 67}, {"n", 2}, {"a", 1}, {"b", 1}, {"rotate", true}};
    Stopwatch clock;
    const PrimePowerModulus mod(67, 2);
    const auto vertices = path_polyline(KloostermanParams(mod, 1, 1));
    std::ostringstream svg;
    write_path_svg(svg, vertices, SvgOptions{.rotate = true});
    report.seconds = clock.seconds();
    report.observed = {{"seconds", report.seconds}, {"vertices", vertices.size()}, {"bytes", svg.str().size()}};
    report.reference = {{"seconds", 1.0}, {"vertices", 4422}};
    report.pass = report.seconds < 1.0 && vertices.size() == 4422;
    out.push_back(report);
  }
  return out;
}

}  // namespace klpath
