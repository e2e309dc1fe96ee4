#include "klpath/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "klpath/accumulate.hpp"
#include "klpath/errors.hpp"
#include "klpath/parallel.hpp"
#include "klpath/random_series.hpp"

namespace klpath {

namespace {

Complex int_pow(Complex z, unsigned e) {
  Complex r = 1.0;
  for (unsigned i = 0; i < e; ++i) r *= z;
  return r;
}

double binomial(unsigned m, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(m - k + i) / static_cast<double>(i);
  return r;
}

void require_unit(std::uint64_t b0, const PrimePowerModulus& mod) {
  if (!mod.is_unit(b0 % mod.q())) throw NotCoprime("b0 must be coprime to p");
}

}  // namespace

// ---------------------------------------------------------------------------
// Patterns and specs

ShiftPattern::ShiftPattern(const std::map<std::int64_t, unsigned>& entries, const PrimePowerModulus& mod,
                           unsigned cap)
    : p_(mod.p()) {
  for (const auto& [shift, multiplicity] : entries) {
    if (multiplicity == 0) throw PreconditionViolated("shift multiplicities must be at least 1");
    entries_[mod.reduce(shift)] += multiplicity;
    total_ += multiplicity;
  }
  if (entries_.empty()) throw PreconditionViolated("shift pattern must be nonempty");
  if (total_ > cap) throw PreconditionViolated("shift pattern exceeds its total multiplicity cap");
  distinct_mod_p_ = support_mod_p().size() == entries_.size();
}

std::vector<std::uint64_t> ShiftPattern::support() const {
  std::vector<std::uint64_t> out;
  for (const auto& [shift, multiplicity] : entries_) out.push_back(shift);
  return out;
}

std::vector<std::uint64_t> ShiftPattern::support_mod_p() const {
  std::set<std::uint64_t> reduced;
  for (const auto& [shift, multiplicity] : entries_) reduced.insert(shift % p_);
  return {reduced.begin(), reduced.end()};
}

void MomentSpec::validate() const {
  if (t.empty() || t.size() != conj_powers.size() || t.size() != powers.size()) {
    throw PreconditionViolated("moment vectors must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0 && t[i] <= 1.0)) throw DomainError("moment times must lie in [0, 1]");
    if (i > 0 && !(t[i] > t[i - 1])) throw PreconditionViolated("moment times must be strictly increasing");
  }
  if (total_order() == 0) throw PreconditionViolated("moment of total order zero");
}

unsigned MomentSpec::total_order() const {
  unsigned total = 0;
  for (std::size_t i = 0; i < conj_powers.size(); ++i) total += conj_powers[i] + powers[i];
  return total;
}

std::vector<std::uint64_t> IntervalSpec::members(const PrimePowerModulus& mod) const {
  if (lo < 1 || lo > hi || hi >= mod.q()) throw PreconditionViolated("interval must satisfy 1 <= lo <= hi < q");
  std::vector<std::uint64_t> out;
  for (std::uint64_t x = lo; x <= hi; ++x) {
    if (mod.is_unit(x)) out.push_back(x);
  }
  if (out.empty()) throw PreconditionViolated("interval contains no unit");
  return out;
}

// ---------------------------------------------------------------------------
// Moments of the path

Eigen::MatrixXcd path_value_matrix(std::span<const double> t, std::uint64_t b0, const PrimePowerModulus& mod,
                                   bool use_step) {
  require_unit(b0, mod);
  const std::uint64_t phi = mod.phi();
  const std::uint64_t p = mod.p();
  const std::uint64_t q = mod.q();
  b0 %= q;

  // For each column, the unit counts whose partial sums are needed and how to
  // combine them. Columns at t = 1 are complete sums.
  struct Column {
    bool complete = false;
    std::uint64_t lower = 0;  // partial sum index (number of units summed)
    std::uint64_t upper = 0;
    double fraction = 0.0;
  };
  std::vector<Column> columns(t.size());
  std::uint64_t needed = 0;
  bool any_complete = false;
  bool any_partial = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0 && t[i] <= 1.0)) throw DomainError("times must lie in [0, 1]");
    Column& c = columns[i];
    if (t[i] == 1.0) {
      c.complete = true;
      any_complete = true;
      continue;
    }
    any_partial = true;
    if (use_step) {
      const std::uint64_t endpoint = step_endpoint(t[i], mod);
      c.lower = c.upper = endpoint - endpoint / p;
    } else {
      const auto pos = path_segment(t[i], phi);
      c.lower = pos.j;
      c.upper = pos.j + 1;
      c.fraction = pos.fraction;
    }
    needed = std::max(needed, c.upper);
  }

  std::optional<PhaseTable> table;
  if (any_partial) table.emplace(mod);
  std::vector<std::uint64_t> b_inverse;  // b0 * x^-1 mod q
  if (any_partial) {
    b_inverse.resize(needed + needed / (p - 1) + 2, 0);
    for (std::uint64_t x = 1; x < b_inverse.size() && x < q; ++x) {
      if (mod.is_unit(x)) b_inverse[x] = mul_mod(b0, table->inverse(x), q);
    }
  }
  const bool compensate = needed > 100'000;
  const double scale = 1.0 / mod.sqrt_q();

  Eigen::MatrixXcd values(static_cast<Eigen::Index>(phi), static_cast<Eigen::Index>(t.size()));
  for_each_block(phi, 256, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    std::vector<Complex> partial(any_partial ? needed + 1 : 0);
    for (std::uint64_t row = begin; row < end; ++row) {
      const std::uint64_t a = unit_at(row + 1, p);
      if (any_partial) {
        partial[0] = 0.0;
        CompensatedComplexSum comp;
        Complex plain = 0.0;
        std::uint64_t count = 0;
        std::uint64_t ax = 0;
        std::uint64_t residue = 0;  // x mod p
        for (std::uint64_t x = 1; count < needed; ++x) {
          ax = add_mod(ax, a, q);
          if (++residue == p) {
            residue = 0;
            continue;
          }
          const Complex term = table->root(add_mod(ax, b_inverse[x], q));
          ++count;
          if (compensate) {
            comp.add(term);
            partial[count] = comp.value() * scale;
          } else {
            plain += term;
            partial[count] = plain * scale;
          }
        }
      }
      const double complete = any_complete ? kl_value(KloostermanParams(mod, static_cast<std::int64_t>(a),
                                                                        static_cast<std::int64_t>(b0)))
                                           : 0.0;
      for (std::size_t i = 0; i < columns.size(); ++i) {
        const Column& c = columns[i];
        Complex v;
        if (c.complete) {
          v = complete;
        } else if (c.lower == c.upper) {
          v = partial[c.lower];
        } else {
          v = partial[c.lower] + (partial[c.upper] - partial[c.lower]) * c.fraction;
        }
        values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = v;
      }
    }
  });
  return values;
}

Complex moment_from_values(const Eigen::MatrixXcd& values, std::span<const unsigned> conj_powers,
                           std::span<const unsigned> powers) {
  if (static_cast<std::size_t>(values.cols()) != conj_powers.size() || conj_powers.size() != powers.size()) {
    throw PreconditionViolated("moment powers must match the number of columns");
  }
  CompensatedComplexSum sum;
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    Complex y = 1.0;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const Complex z = values(r, c);
      y *= int_pow(std::conj(z), conj_powers[static_cast<std::size_t>(c)]) *
           int_pow(z, powers[static_cast<std::size_t>(c)]);
    }
    sum.add(y);
  }
  return sum.value() / static_cast<double>(values.rows());
}

Complex empirical_moment(const MomentSpec& spec, const PrimePowerModulus& mod, bool use_step) {
  spec.validate();
  const auto values = path_value_matrix(spec.t, spec.b0, mod, use_step);
  return moment_from_values(values, spec.conj_powers, spec.powers);
}

// ---------------------------------------------------------------------------
// Shifted moments

std::vector<double> complete_sum_table(std::uint64_t b0, const PrimePowerModulus& mod) {
  std::vector<double> table(mod.q());
  const auto b = static_cast<std::int64_t>(b0 % mod.q());
  for_each_block(mod.q(), 4096, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t c = begin; c < end; ++c) {
      table[c] = kl_value(KloostermanParams(mod, static_cast<std::int64_t>(c), b));
    }
  });
  return table;
}

double shifted_moment(const ShiftPattern& pattern, std::span<const double> table, const PrimePowerModulus& mod) {
  if (table.size() != mod.q()) throw PreconditionViolated("complete-sum table must cover every residue");
  const std::uint64_t q = mod.q();
  const std::uint64_t p = mod.p();
  const auto total = block_reduce(
      mod.phi(), 4096,
      [&](std::uint64_t begin, std::uint64_t end) {
        CompensatedSum acc;
        for (std::uint64_t r = begin; r < end; ++r) {
          const std::uint64_t a = unit_at(r + 1, p);
          double product = 1.0;
          for (const auto& [shift, multiplicity] : pattern.entries()) {
            const double kl = table[add_mod(a, shift, q)];
            for (unsigned i = 0; i < multiplicity; ++i) product *= kl;
          }
          acc.add(product);
        }
        return acc;
      },
      [](CompensatedSum x, const CompensatedSum& y) {
        x.merge(y);
        return x;
      },
      CompensatedSum{});
  return total.value() / static_cast<double>(mod.phi());
}

double shifted_moment(const ShiftPattern& pattern, std::uint64_t b0, const PrimePowerModulus& mod) {
  const auto table = complete_sum_table(b0, mod);
  return shifted_moment(pattern, table, mod);
}

std::uint64_t a_count_exact(const ShiftPattern& pattern, const PrimePowerModulus& mod) {
  const std::uint64_t p = mod.p();
  const auto shifts = pattern.support_mod_p();
  std::uint64_t count = 0;
  for (std::uint64_t a = 1; a < p; ++a) {
    const bool all_squares = std::all_of(shifts.begin(), shifts.end(), [&](std::uint64_t tau) {
      return jacobi_symbol(static_cast<std::int64_t>((a + tau) % p), p) == 1;
    });
    if (all_squares) ++count;
  }
  return count * (mod.q() / p);
}

double shifted_moment_main_term(const ShiftPattern& pattern, const PrimePowerModulus& mod) {
  if (!pattern.distinct_mod_p()) throw PatternCollision("two shifts of the pattern agree modulo p");
  double factor = 1.0;
  for (const auto& [shift, multiplicity] : pattern.entries()) {
    if (multiplicity % 2 == 1) return 0.0;
    factor *= binomial(multiplicity, multiplicity / 2);
  }
  return factor * static_cast<double>(a_count_exact(pattern, mod)) / static_cast<double>(mod.phi());
}

std::uint64_t n_count(std::uint64_t p, unsigned n, std::span<const std::int64_t> shifts,
                      std::span<const std::int64_t> ell, std::int64_t w) {
  if (p < 3 || !is_prime(p)) throw PreconditionViolated("p must be an odd prime");
  if (shifts.empty() || shifts.size() != ell.size()) {
    throw PreconditionViolated("shifts and ell must be nonempty and of equal length");
  }
  bool nonzero = false;
  for (std::int64_t l : ell) {
    if (l >= static_cast<std::int64_t>(p) || -l >= static_cast<std::int64_t>(p)) {
      throw PreconditionViolated("every |ell_tau| must be below p");
    }
    nonzero = nonzero || l != 0;
  }
  if (!nonzero) throw PreconditionViolated("ell must be nonzero");
  std::set<std::uint64_t> reduced;
  for (std::int64_t s : shifts) reduced.insert(reduce_signed(s, p));
  if (reduced.size() != shifts.size()) throw PreconditionViolated("shifts must be distinct modulo p");

  const std::size_t k = shifts.size();
  const std::uint64_t half = (p - 1) / 2;
  const std::uint64_t target = reduce_signed(w, p);
  std::vector<std::uint64_t> tau(k);
  std::vector<std::uint64_t> weight(k);
  for (std::size_t i = 0; i < k; ++i) {
    tau[i] = reduce_signed(shifts[i], p);
    weight[i] = reduce_signed(ell[i], p);
  }

  std::uint64_t count = 0;
  std::vector<std::uint64_t> b(k, 1);
  // Odometer over {1, ..., (p-1)/2}^k.
  while (true) {
    const std::uint64_t c = sub_mod(mul_mod(b[0], b[0], p), tau[0], p);
    bool ok = c != 0;
    for (std::size_t i = 1; ok && i < k; ++i) ok = sub_mod(mul_mod(b[i], b[i], p), tau[i], p) == c;
    if (ok) {
      std::vector<std::uint64_t> inv(k);
      for (std::size_t i = 0; i < k; ++i) inv[i] = *inverse_mod(b[i], p);
      auto moment = [&](unsigned j) {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < k; ++i) s = add_mod(s, mul_mod(weight[i], pow_mod(inv[i], 2 * j - 1, p), p), p);
        return s;
      };
      ok = moment(1) == target;
      for (unsigned j = 2; ok && j + 1 <= n; ++j) ok = moment(j) == 0;
      if (ok) ++count;
    }
    std::size_t pos = 0;
    while (pos < k && b[pos] == half) b[pos++] = 1;
    if (pos == k) break;
    ++b[pos];
  }
  return count;
}

// ---------------------------------------------------------------------------
// Fourth moments

std::uint64_t quadruple_count(const IntervalSpec& interval, const PrimePowerModulus& mod,
                              std::uint64_t additive_modulus, std::uint64_t inverse_modulus) {
  const std::uint64_t q = mod.q();
  const std::uint64_t lower = q / mod.p();
  auto admissible = [&](std::uint64_t m) { return m == q || m == lower; };
  if (!admissible(additive_modulus) || !admissible(inverse_modulus)) {
    throw PreconditionViolated("quadruple moduli must be q or q/p");
  }
  const auto xs = interval.members(mod);
  std::vector<std::uint64_t> inv(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) inv[i] = mod_inverse(xs[i], mod) % inverse_modulus;

  // Meet in the middle: bucket ordered pairs by (x1 + x2, x1^-1 + x2^-1); each
  // bucket of size c contributes c^2 quadruples.
  std::unordered_map<std::uint64_t, std::uint64_t> buckets;
  buckets.reserve(xs.size() * xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const std::uint64_t sum = (xs[i] + xs[j]) % additive_modulus;
      const std::uint64_t inv_sum = (inv[i] + inv[j]) % inverse_modulus;
      ++buckets[sum * inverse_modulus + inv_sum];
    }
  }
  std::uint64_t total = 0;
  for (const auto& [key, c] : buckets) total += c * c;
  return total;
}

double fourth_moment(const IntervalSpec& interval, const PrimePowerModulus& mod, FourthMomentAlgorithm algorithm) {
  const std::uint64_t q = mod.q();
  const std::uint64_t p = mod.p();
  const double phi = static_cast<double>(mod.phi());
  if (algorithm == FourthMomentAlgorithm::counting) {
    const std::uint64_t lower = q / p;
    const auto c1 = static_cast<__int128>(quadruple_count(interval, mod, q, q));
    const auto c2 = static_cast<__int128>(quadruple_count(interval, mod, q, lower));
    const auto c3 = static_cast<__int128>(quadruple_count(interval, mod, lower, q));
    const auto c4 = static_cast<__int128>(quadruple_count(interval, mod, lower, lower));
    const auto pp = static_cast<__int128>(p);
    // phi^-2 (c1 - c2/p - c3/p + c4/p^2) over the common denominator p^2.
    const __int128 numerator = c1 * pp * pp - (c2 + c3) * pp + c4;
    return static_cast<double>(static_cast<long double>(numerator) /
                               (static_cast<long double>(p) * static_cast<long double>(p) *
                                static_cast<long double>(phi) * static_cast<long double>(phi)));
  }
  if (q > 200) throw ResourceLimit("direct fourth moment is limited to q <= 200");
  const auto xs = interval.members(mod);
  const PhaseTable table(mod);
  std::vector<std::uint64_t> inv(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) inv[i] = table.inverse(xs[i]);
  CompensatedSum total;
  for (std::uint64_t a = 1; a < q; ++a) {
    if (!mod.is_unit(a)) continue;
    for (std::uint64_t b = 1; b < q; ++b) {
      if (!mod.is_unit(b)) continue;
      Complex s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        s += table.root((a * xs[i] + b * inv[i]) % q);
      }
      const double norm = std::norm(s);
      total.add(norm * norm);
    }
  }
  return total.value() / (static_cast<double>(q) * static_cast<double>(q) * phi * phi);
}

// ---------------------------------------------------------------------------
// Increments

std::vector<double> increment_moments(std::span<const IncrementQuery> queries, const PrimePowerModulus& mod) {
  constexpr std::uint64_t kMaxPhi = 2000;
  if (mod.phi() > kMaxPhi) throw ResourceLimit("increment moments need phi(q) <= 2000");
  for (const auto& query : queries) {
    if (!(0.0 <= query.s && query.s <= query.t && query.t <= 1.0)) {
      throw DomainError("increment moments need 0 <= s <= t <= 1");
    }
  }
  const std::uint64_t q = mod.q();
  const std::uint64_t p = mod.p();
  const std::uint64_t phi = mod.phi();
  const PhaseTable table(mod);
  std::vector<std::uint64_t> units(phi);
  for (std::uint64_t j = 1; j <= phi; ++j) units[j - 1] = unit_at(j, p);

  using Sums = std::vector<CompensatedSum>;
  const auto totals = block_reduce(
      phi, 8,
      [&](std::uint64_t begin, std::uint64_t end) {
        Sums sums(queries.size());
        std::vector<Complex> vertices(phi);
        for (std::uint64_t ia = begin; ia < end; ++ia) {
          const std::uint64_t a = units[ia];
          for (std::uint64_t b : units) {
            Complex running = 0.0;
            for (std::uint64_t j = 0; j < phi; ++j) {
              const std::uint64_t x = units[j];
              running += table.root(add_mod(mul_mod(a, x, q), mul_mod(b, table.inverse(x), q), q));
              vertices[j] = running / mod.sqrt_q();
            }
            for (std::size_t k = 0; k < queries.size(); ++k) {
              const Complex diff = path_eval(queries[k].t, vertices) - path_eval(queries[k].s, vertices);
              const double norm = std::norm(diff);
              sums[k].add(norm * norm);
            }
          }
        }
        return sums;
      },
      [](Sums x, const Sums& y) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k].merge(y[k]);
        return x;
      },
      Sums(queries.size()));
  std::vector<double> out;
  out.reserve(queries.size());
  const double pairs = static_cast<double>(phi) * static_cast<double>(phi);
  for (const auto& s : totals) out.push_back(s.value() / pairs);
  return out;
}

double increment_moment(double s, double t, const PrimePowerModulus& mod) {
  const IncrementQuery query{s, t};
  return increment_moments(std::span(&query, 1), mod).front();
}

ExperimentReport tightness_sweep(const PrimePowerModulus& mod, std::uint64_t trials, std::uint64_t seed) {
  Stopwatch clock;
  ExperimentReport report;
  report.name = "tightness";
  report.params = {{"p", mod.p()}, {"n", mod.n()}, {"trials", trials}, {"seed", seed}};
  report.reference = {{"cap", kIncrementCap}, {"bound", "n (t - s)^2"}};
  report.provenance = "Kolmogorov increment bound; the cap is an empirical constant";
  report.tolerance = kIncrementCap;

  const double segment = 1.0 / static_cast<double>(mod.phi() - 1);
  std::vector<IncrementQuery> queries;
  std::vector<int> regime;
  for (std::uint64_t i = 0; i < trials; ++i) {
    CounterRng rng(seed, i);
    const bool first = i % 2 == 0;
    // Gap strictly positive: (0, segment] in the first range, [segment, 1] in the second.
    const double gap = first ? segment * (1.0 - rng.uniform()) : segment + (1.0 - segment) * rng.uniform();
    const double s = (1.0 - gap) * rng.uniform();
    queries.push_back({s, std::min(1.0, s + gap)});
    regime.push_back(first ? 1 : 2);
  }
  const auto values = queries.empty() ? std::vector<double>{} : increment_moments(queries, mod);

  double max_ratio = 0.0;
  double max_first = 0.0;
  double max_second = 0.0;
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double gap = queries[i].t - queries[i].s;
    const double ratio = values[i] / (static_cast<double>(mod.n()) * gap * gap);
    max_ratio = std::max(max_ratio, ratio);
    (regime[i] == 1 ? max_first : max_second) = std::max(regime[i] == 1 ? max_first : max_second, ratio);
    samples.push_back({{"s", queries[i].s}, {"t", queries[i].t}, {"moment", values[i]}, {"ratio", ratio}});
  }
  report.observed = {{"max_ratio", max_ratio},
                     {"max_ratio_first_range", max_first},
                     {"max_ratio_second_range", max_second},
                     {"samples", samples}};
  report.pass = max_ratio <= kIncrementCap;
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Distribution distance

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left) {
  if (samples.empty()) throw PreconditionViolated("KS statistic needs at least one sample");
  if (!std::is_sorted(samples.begin(), samples.end())) throw PreconditionViolated("samples must be sorted");
  const double n = static_cast<double>(samples.size());
  double distance = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    const double v = samples[i];
    std::size_t j = i;
    while (j < samples.size() && samples[j] == v) ++j;
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    distance = std::max({distance, std::abs(below - cdf_left(v)), std::abs(at - cdf(v))});
    i = j;
  }
  return distance;
}

}  // namespace klpath
