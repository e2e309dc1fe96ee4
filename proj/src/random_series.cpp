#include "klpath/random_series.hpp"

#include <algorithm>
#include <cmath>

#include "klpath/accumulate.hpp"
#include "klpath/errors.hpp"
#include "klpath/kloosterman.hpp"
#include "klpath/parallel.hpp"

namespace klpath {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

// 0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ...
constexpr std::uint64_t zigzag(int h) noexcept {
  return h > 0 ? 2 * static_cast<std::uint64_t>(h) - 1 : 2 * static_cast<std::uint64_t>(-static_cast<std::int64_t>(h));
}

Complex int_pow(Complex z, unsigned e) {
  Complex r = 1.0;
  for (unsigned i = 0; i < e; ++i) r *= z;
  return r;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept
    : key_(mix64(seed ^ mix64(stream + kGolden))), counter_(counter) {}

std::uint64_t CounterRng::at(std::uint64_t counter) const noexcept { return mix64(key_ + (counter + 1) * kGolden); }

double mu_sample(CounterRng& rng) noexcept {
  const bool atom = (rng.next() >> 63U) == 0;
  const double v = rng.uniform();
  return atom ? 0.0 : 2.0 * std::cos(kPi * v);
}

double mu_moment(unsigned m) {
  if (m == 0) return 1.0;
  if (m % 2 == 1) return 0.0;
  double binom = 1.0;
  for (unsigned i = 1; i <= m / 2; ++i) binom = binom * static_cast<double>(m / 2 + i) / static_cast<double>(i);
  return 0.5 * binom;
}

double mu_cdf_left(double x) {
  if (x <= -2.0) return 0.0;
  if (x > 2.0) return 1.0;
  const double arcsine = (std::asin(std::clamp(x / 2.0, -1.0, 1.0)) + kPi / 2.0) / (2.0 * kPi);
  return arcsine + (x > 0.0 ? 0.5 : 0.0);
}

double mu_cdf(double x) {
  if (x < -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double arcsine = (std::asin(std::clamp(x / 2.0, -1.0, 1.0)) + kPi / 2.0) / (2.0 * kPi);
  return arcsine + (x >= 0.0 ? 0.5 : 0.0);
}

SeriesVariate::SeriesVariate(int truncation, std::uint64_t seed, std::uint64_t stream)
    : truncation_(truncation), seed_(seed) {
  if (truncation < 0) throw PreconditionViolated("truncation order must be non-negative");
  u_.resize(2 * static_cast<std::size_t>(truncation) + 1);
  CounterRng rng(seed, stream);
  for (int h = -truncation; h <= truncation; ++h) {
    rng.seek(2 * zigzag(h));
    u_[static_cast<std::size_t>(h + truncation)] = mu_sample(rng);
  }
}

SeriesVariate::SeriesVariate(int truncation, std::vector<double> coefficients)
    : truncation_(truncation), u_(std::move(coefficients)) {
  if (u_.size() != 2 * static_cast<std::size_t>(truncation) + 1) {
    throw PreconditionViolated("a variate of order H needs 2H + 1 coefficients");
  }
}

Complex series_eval(double t, const SeriesVariate& v) {
  Complex sum = t * v.coeff(0);
  for (int h = 1; h <= v.truncation(); ++h) {
    const Complex beta = beta_coeff(h, t);
    // beta(-h, t) is the conjugate of beta(h, t)
    const double plus = v.coeff(h);
    const double minus = v.coeff(-h);
    sum += Complex(beta.real() * (plus + minus), beta.imag() * (plus - minus));
  }
  return sum;
}

SeriesEvaluator::SeriesEvaluator(std::span<const double> grid, int truncation)
    : grid_(grid.begin(), grid.end()), truncation_(truncation) {
  beta_.resize(grid_.size() * static_cast<std::size_t>(truncation));
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    for (int h = 1; h <= truncation; ++h) {
      beta_[g * static_cast<std::size_t>(truncation) + static_cast<std::size_t>(h - 1)] = beta_coeff(h, grid_[g]);
    }
  }
}

void SeriesEvaluator::evaluate(const SeriesVariate& v, std::span<Complex> out) const {
  const int H = std::min(truncation_, v.truncation());
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    const Complex* beta = beta_.data() + g * static_cast<std::size_t>(truncation_);
    double re = grid_[g] * v.coeff(0);
    double im = 0.0;
    for (int h = 1; h <= H; ++h) {
      const double plus = v.coeff(h);
      const double minus = v.coeff(-h);
      re += beta[h - 1].real() * (plus + minus);
      im += beta[h - 1].imag() * (plus - minus);
    }
    out[g] = {re, im};
  }
}

Eigen::MatrixXcd series_sample_paths(std::span<const double> grid, int truncation, std::uint64_t samples,
                                     std::uint64_t seed) {
  const SeriesEvaluator evaluator(grid, truncation);
  Eigen::MatrixXcd paths(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(grid.size()));
  for_each_block(samples, 256, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    std::vector<Complex> row(grid.size());
    for (std::uint64_t i = begin; i < end; ++i) {
      evaluator.evaluate(SeriesVariate(truncation, seed, i), row);
      for (std::size_t g = 0; g < row.size(); ++g) {
        paths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = row[g];
      }
    }
  });
  return paths;
}

namespace {

struct MomentAccumulator {
  CompensatedComplexSum sum;
  CompensatedSum sum_sq;  // sum of |y|^2
};

}  // namespace

MonteCarloEstimate series_moment_mc(std::span<const double> t, std::span<const unsigned> conj_powers,
                                    std::span<const unsigned> powers, int truncation, std::uint64_t samples,
                                    std::uint64_t seed) {
  if (t.empty() || t.size() != conj_powers.size() || t.size() != powers.size()) {
    throw PreconditionViolated("moment vectors must be nonempty and of equal length");
  }
  if (samples < 2) throw PreconditionViolated("Monte Carlo moments need at least two samples");
  const SeriesEvaluator evaluator(t, truncation);
  const auto total = block_reduce(
      samples, 512,
      [&](std::uint64_t begin, std::uint64_t end) {
        MomentAccumulator acc;
        std::vector<Complex> values(t.size());
        for (std::uint64_t i = begin; i < end; ++i) {
          evaluator.evaluate(SeriesVariate(truncation, seed, i), values);
          Complex y = 1.0;
          for (std::size_t k = 0; k < t.size(); ++k) {
            y *= int_pow(std::conj(values[k]), conj_powers[k]) * int_pow(values[k], powers[k]);
          }
          acc.sum.add(y);
          acc.sum_sq.add(std::norm(y));
        }
        return acc;
      },
      [](MomentAccumulator a, const MomentAccumulator& b) {
        a.sum.merge(b.sum);
        a.sum_sq.merge(b.sum_sq);
        return a;
      },
      MomentAccumulator{});
  const double n = static_cast<double>(samples);
  const Complex mean = total.sum.value() / n;
  const double variance = std::max(0.0, (total.sum_sq.value() / n - std::norm(mean)) * n / (n - 1.0));
  return {mean, std::sqrt(variance / n)};
}

TruncationDecay truncation_decay(double t, std::span<const int> truncations, std::uint64_t realisations,
                                 std::uint64_t seed) {
  if (truncations.size() < 2) throw PreconditionViolated("a power-law fit needs at least two truncations");
  const int largest = *std::max_element(truncations.begin(), truncations.end());
  std::vector<CompensatedSum> gaps(truncations.size());
  // Pairs (h, -h) contribute beta(h, t) (U_h + U_-h) in the real part and
  // the same with U_h - U_-h in the imaginary part.
  std::vector<Complex> beta(static_cast<std::size_t>(2 * largest));
  for (int h = 1; h <= 2 * largest; ++h) beta[static_cast<std::size_t>(h - 1)] = beta_coeff(h, t);
  for (std::uint64_t r = 0; r < realisations; ++r) {
    const SeriesVariate v(2 * largest, seed, r);
    for (std::size_t i = 0; i < truncations.size(); ++i) {
      const int H = truncations[i];
      double re = 0.0;
      double im = 0.0;
      for (int h = H + 1; h <= 2 * H; ++h) {
        const Complex b = beta[static_cast<std::size_t>(h - 1)];
        re += b.real() * (v.coeff(h) + v.coeff(-h));
        im += b.imag() * (v.coeff(h) - v.coeff(-h));
      }
      gaps[i].add(std::hypot(re, im));
    }
  }
  TruncationDecay out;
  out.truncations.assign(truncations.begin(), truncations.end());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(truncations.size()), 2);
  Eigen::VectorXd target(static_cast<Eigen::Index>(truncations.size()));
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    const double mean_gap = gaps[i].value() / static_cast<double>(realisations);
    out.mean_gap.push_back(mean_gap);
    design(static_cast<Eigen::Index>(i), 0) = 1.0;
    design(static_cast<Eigen::Index>(i), 1) = std::log(static_cast<double>(truncations[i]));
    target(static_cast<Eigen::Index>(i)) = std::log(mean_gap);
  }
  const Eigen::Vector2d fit = design.colPivHouseholderQr().solve(target);
  out.constant = std::exp(fit(0));
  out.exponent = fit(1);
  return out;
}

}  // namespace klpath
