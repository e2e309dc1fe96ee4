#pragma once

// Empirical moments of Kloosterman paths, shifted-sum moments and their main
// term, the exact counts behind them, fourth moments of incomplete sums,
// increment moments and distribution distances.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "klpath/kloosterman.hpp"
#include "klpath/modular.hpp"
#include "klpath/report.hpp"

namespace klpath {

// Multiplicities mu(tau) >= 1 indexed by shifts tau mod q.
class ShiftPattern {
 public:
  static constexpr unsigned kDefaultCap = 64;

  // Shifts are reduced mod q; repeated shifts add up. Throws
  // PreconditionViolated if the pattern is empty, holds a zero multiplicity
  // or exceeds `cap` in total.
  ShiftPattern(const std::map<std::int64_t, unsigned>& entries, const PrimePowerModulus& mod,
               unsigned cap = kDefaultCap);

  const std::map<std::uint64_t, unsigned>& entries() const noexcept { return entries_; }
  std::vector<std::uint64_t> support() const;
  // Distinct residues of the support mod p.
  std::vector<std::uint64_t> support_mod_p() const;
  unsigned total() const noexcept { return total_; }
  // |T(mu)| equals the number of distinct reductions mod p.
  bool distinct_mod_p() const noexcept { return distinct_mod_p_; }

 private:
  std::map<std::uint64_t, unsigned> entries_;
  std::uint64_t p_;
  unsigned total_ = 0;
  bool distinct_mod_p_ = true;
};

// prod_i conj(X(t_i))^{m_i} X(t_i)^{n_i} averaged over a, for a fixed b0.
struct MomentSpec {
  std::vector<double> t;               // strictly increasing in [0, 1]
  std::vector<unsigned> conj_powers;   // m
  std::vector<unsigned> powers;        // n
  std::uint64_t b0 = 1;

  // Throws PreconditionViolated when the invariants fail.
  void validate() const;
  unsigned total_order() const;
};

// Units x with lo <= x <= hi.
struct IntervalSpec {
  std::uint64_t lo;
  std::uint64_t hi;

  std::vector<std::uint64_t> members(const PrimePowerModulus& mod) const;
};

// Row r holds X(t_1), ..., X(t_k) for the r-th unit a in increasing order,
// where X is the Kloosterman path (or the step function when use_step is set)
// of (a, b0).
Eigen::MatrixXcd path_value_matrix(std::span<const double> t, std::uint64_t b0, const PrimePowerModulus& mod,
                                   bool use_step = false);

// Average over the rows of `values` of prod_i conj(X_i)^{m_i} X_i^{n_i}.
Complex moment_from_values(const Eigen::MatrixXcd& values, std::span<const unsigned> conj_powers,
                           std::span<const unsigned> powers);

Complex empirical_moment(const MomentSpec& spec, const PrimePowerModulus& mod, bool use_step = false);

// Kl(c, b0) for every residue c mod q.
std::vector<double> complete_sum_table(std::uint64_t b0, const PrimePowerModulus& mod);

// (1/phi) sum_a prod_tau Kl(a + tau, b0)^{mu(tau)} over units a.
double shifted_moment(const ShiftPattern& pattern, std::uint64_t b0, const PrimePowerModulus& mod);
double shifted_moment(const ShiftPattern& pattern, std::span<const double> table, const PrimePowerModulus& mod);

// [prod_tau delta_{2 | mu} binom(mu, mu/2)] |A(mu)| / phi. Throws
// PatternCollision if two shifts agree mod p.
double shifted_moment_main_term(const ShiftPattern& pattern, const PrimePowerModulus& mod);

// |A(mu)| = p^(n-1) #{a mod p, p not dividing a : a + tau nonzero square mod p for all tau}.
std::uint64_t a_count_exact(const ShiftPattern& pattern, const PrimePowerModulus& mod);

// Number of tuples b in {1, ..., (p-1)/2}^T with b_tau^2 - tau all equal and
// nonzero mod p, sum ell_tau b_tau^-1 = w and, for 2 <= j <= n - 1,
// sum ell_tau b_tau^-(2j-1) = 0 mod p. Exhaustive.
std::uint64_t n_count(std::uint64_t p, unsigned n, std::span<const std::int64_t> shifts,
                      std::span<const std::int64_t> ell, std::int64_t w);

enum class FourthMomentAlgorithm { direct, counting };

// M4(I) = phi^-2 sum_{a, b units} |p^(-n/2) sum_{x in I} e((ax + b x^-1)/q)|^4.
// The direct double sum is refused with ResourceLimit for q > 200.
double fourth_moment(const IntervalSpec& interval, const PrimePowerModulus& mod, FourthMomentAlgorithm algorithm);

// #{(x1, x2, x3, x4) in I^4 : x1 + x2 = x3 + x4 mod m1, x1^-1 + x2^-1 = x3^-1 + x4^-1 mod m2},
// inverses taken mod q; m1, m2 must each be q or q/p.
std::uint64_t quadruple_count(const IntervalSpec& interval, const PrimePowerModulus& mod, std::uint64_t additive_modulus,
                              std::uint64_t inverse_modulus);

struct IncrementQuery {
  double s;
  double t;
};

// phi^-2 sum_{(a, b)} |Kl(t; (a, b)) - Kl(s; (a, b))|^4 for each query, sharing
// one path per pair. Throws ResourceLimit when phi(q) > 2000.
std::vector<double> increment_moments(std::span<const IncrementQuery> queries, const PrimePowerModulus& mod);
double increment_moment(double s, double t, const PrimePowerModulus& mod);

// Kolmogorov-Smirnov distance between the empirical law of sorted `samples`
// and a distribution with right-continuous cdf and left limits cdf_left.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left);

// Kolmogorov increment check over random (s, t), alternating between gaps
// below and above one segment length 1/(phi - 1). Passes when the largest
// ratio increment_moment / (n (t - s)^2) stays within kIncrementCap.
inline constexpr double kIncrementCap = 100.0;
ExperimentReport tightness_sweep(const PrimePowerModulus& mod, std::uint64_t trials, std::uint64_t seed);

}  // namespace klpath
