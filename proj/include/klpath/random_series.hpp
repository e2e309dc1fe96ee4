#pragma once

// The limit process: i.i.d. coefficients U_h with law mu = delta_0 / 2 + mu_1
// (mu_1 the mass-1/2 arcsine law on [-2, 2]) and the truncated random Fourier
// series Kl_H(t) = t U_0 + sum_{1 <= |h| <= H} (e(ht) - 1) / (2 pi i h) U_h.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace klpath {

using Complex = std::complex<double>;

// Counter-based generator: draw(seed, stream, counter) is the SplitMix64
// finaliser applied to a key derived from (seed, stream) plus the counter
// times the golden-ratio increment. Streams are independent substreams, so
// sample i of any experiment draws from stream i regardless of scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t counter = 0) noexcept;

  std::uint64_t at(std::uint64_t counter) const noexcept;
  std::uint64_t next() noexcept { return at(counter_++); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11U) * 0x1.0p-53; }

  std::uint64_t counter() const noexcept { return counter_; }
  void seek(std::uint64_t counter) noexcept { counter_ = counter; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

// One draw from mu. Always consumes two words: the first picks the atom at 0
// with probability 1/2, the second gives V uniform in [0, 1) and the value
// 2 cos(pi V), whose law is the arcsine law on [-2, 2].
double mu_sample(CounterRng& rng) noexcept;

// Integral of x^m against mu: 1 for m = 0, binom(m, m/2) / 2 for even m > 0, 0 for odd m.
double mu_moment(unsigned m);

// Right-continuous distribution function of mu, and its left limit.
double mu_cdf(double x);
double mu_cdf_left(double x);

// One realisation (U_h)_{|h| <= H}. U_h depends only on (seed, stream, h), so
// variates of different truncation orders drawn from the same stream are nested.
class SeriesVariate {
 public:
  SeriesVariate(int truncation, std::uint64_t seed, std::uint64_t stream = 0);
  // Explicit coefficients u[0..2H], with u[h + H] = U_h.
  SeriesVariate(int truncation, std::vector<double> coefficients);

  int truncation() const noexcept { return truncation_; }
  double coeff(int h) const { return u_[static_cast<std::size_t>(h + truncation_)]; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  int truncation_;
  std::vector<double> u_;
  std::uint64_t seed_ = 0;
};

// Kl_H(t), summed over increasing |h| with h and -h grouped.
Complex series_eval(double t, const SeriesVariate& v);

// Kl_H evaluated on a grid through precomputed coefficients beta(h, t_g).
class SeriesEvaluator {
 public:
  SeriesEvaluator(std::span<const double> grid, int truncation);

  int truncation() const noexcept { return truncation_; }
  std::size_t grid_size() const noexcept { return grid_.size(); }
  // Values of Kl_H at every grid point; `out` must have grid_size() entries.
  void evaluate(const SeriesVariate& v, std::span<Complex> out) const;

 private:
  std::vector<double> grid_;
  int truncation_;
  std::vector<Complex> beta_;  // [g * H + (h - 1)]
};

// N x |grid| matrix of sample paths; row i is the variate of stream i.
Eigen::MatrixXcd series_sample_paths(std::span<const double> grid, int truncation, std::uint64_t samples,
                                     std::uint64_t seed);

struct MonteCarloEstimate {
  Complex estimate;
  double std_error;
};

// Monte Carlo estimate of E prod_i conj(Kl_H(t_i))^{m_i} Kl_H(t_i)^{n_i}.
MonteCarloEstimate series_moment_mc(std::span<const double> t, std::span<const unsigned> conj_powers,
                                    std::span<const unsigned> powers, int truncation, std::uint64_t samples,
                                    std::uint64_t seed);

struct TruncationDecay {
  std::vector<int> truncations;
  std::vector<double> mean_gap;  // mean |Kl_{2H}(t) - Kl_H(t)|
  double exponent;               // fitted slope of log gap against log H
  double constant;               // fitted C in gap ~ C H^exponent
};

// Mean gap between consecutive dyadic truncations at t over `realisations`
// variates, with a least-squares power-law fit.
TruncationDecay truncation_decay(double t, std::span<const int> truncations, std::uint64_t realisations,
                                 std::uint64_t seed);

}  // namespace klpath
