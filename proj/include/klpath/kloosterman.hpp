#pragma once

// Normalised Kloosterman sums modulo p^n, their partial sums and the
// polygonal path through them, plus the completion toolkit that rewrites the
// step function as a Fourier combination of complete sums.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "klpath/accumulate.hpp"
#include "klpath/errors.hpp"
#include "klpath/modular.hpp"

namespace klpath {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// e(k / m) = exp(2 pi i k / m), evaluated from the representative of k in
// (-m/2, m/2] so the argument never leaves [-pi, pi].
Complex unit_root(std::uint64_t k, std::uint64_t m);

// Precomputed e(k/q) for all k in [0, q) and x^-1 mod q for every unit x.
// Used by the kernels that sweep all a for a fixed b.
class PhaseTable {
 public:
  // Tables beyond this many residues are refused with ResourceLimit.
  static constexpr std::uint64_t kMaxModulus = 50'000'000;

  explicit PhaseTable(const PrimePowerModulus& mod);

  const PrimePowerModulus& mod() const noexcept { return mod_; }
  Complex root(std::uint64_t k) const noexcept { return roots_[k]; }
  // Inverse of x for p not dividing x; 0 for non-units.
  std::uint64_t inverse(std::uint64_t x) const noexcept { return inverses_[x]; }

 private:
  PrimePowerModulus mod_;
  std::vector<Complex> roots_;
  std::vector<std::uint64_t> inverses_;
};

struct KloostermanParams {
  KloostermanParams(PrimePowerModulus modulus, std::int64_t a_in, std::int64_t b_in)
      : mod(modulus), a(modulus.reduce(a_in)), b(modulus.reduce(b_in)) {}

  PrimePowerModulus mod;
  std::uint64_t a;
  std::uint64_t b;
};

struct PathPoint {
  std::uint64_t j;  // 1-based vertex index
  std::uint64_t x;  // j-th integer in [1, q] prime to p
  Complex value;
};

// j-th integer prime to p, counting from 1.
inline std::uint64_t unit_at(std::uint64_t j, std::uint64_t p) { return j + (j - 1) / (p - 1); }

// Direct summation over all x prime to p with compensated accumulation.
Complex kl_naive(const KloostermanParams& params);

// Closed form 2 (s/p^n) cos(4 pi s / p^n + theta) through a square root s of
// ab. Requires n >= 2 and p > 2n - 5, otherwise throws UnsupportedRegime.
double kl_closed(const KloostermanParams& params);

// The closed form for a given root s of s^2 = ab (mod q), p not dividing s.
double kl_closed_from_root(std::uint64_t s, const PrimePowerModulus& mod);

// True when kl_closed accepts the modulus.
bool closed_form_supported(const PrimePowerModulus& mod) noexcept;

// Complete sum through the closed form when supported, by summation otherwise.
double kl_value(const KloostermanParams& params);

// Streams z_1, ..., z_limit (limit defaults to phi(q)) in order. Inverses are
// computed 1024 at a time by batch inversion, so memory stays O(1024).
template <class Visitor>
void partial_sums_stream(const KloostermanParams& params, Visitor&& visit, std::uint64_t limit = 0);

std::vector<PathPoint> partial_sums(const KloostermanParams& params);

// Vertices z_1, ..., z_phi in order.
std::vector<Complex> path_polyline(const KloostermanParams& params);

// Segment [z_j, z_{j+1}] containing t, j = ceil((phi - 1) t) clamped to
// [1, phi - 1], and the position of t inside it in [0, 1].
struct SegmentPosition {
  std::uint64_t j;
  double fraction;
};
SegmentPosition path_segment(double t, std::uint64_t phi);

// Position on the path at t in [0, 1]; throws DomainError outside.
Complex path_eval(double t, const KloostermanParams& params);

// Same evaluation from already computed vertices.
Complex path_eval(double t, std::span<const Complex> vertices);

// Largest integer covered by the step function at t: floor(phi t) + k - 1 for
// the block k with t in ((k-1)/p^(n-1), k/p^(n-1)]; t = 0 maps to block 1.
std::uint64_t step_endpoint(double t, const PrimePowerModulus& mod);

// Normalised discrete Fourier coefficient of [1, step_endpoint(t)], evaluated
// in closed form as a geometric sum.
Complex fourier_alpha(std::int64_t h, double t, const PrimePowerModulus& mod);

// Limit of fourier_alpha / p^(n/2): t for h = 0, (e(ht) - 1) / (2 pi i h) otherwise.
Complex beta_coeff(std::int64_t h, double t);

enum class StepMethod { direct, completion };

// Step function (1/p^(n/2)) sum over x <= step_endpoint(t), p not dividing x,
// either summed directly or rebuilt from complete sums over the symmetric
// residue system {(1-q)/2, ..., (q-1)/2}.
Complex completed_step(double t, const KloostermanParams& params, StepMethod method = StepMethod::direct);

// ---------------------------------------------------------------------------

template <class Visitor>
void partial_sums_stream(const KloostermanParams& params, Visitor&& visit, std::uint64_t limit) {
  const auto& mod = params.mod;
  if (!mod.is_unit(params.a) || !mod.is_unit(params.b)) {
    throw NotCoprime("path operations need gcd(a, p) = gcd(b, p) = 1");
  }
  const std::uint64_t q = mod.q();
  const std::uint64_t p = mod.p();
  if (limit == 0 || limit > mod.phi()) limit = mod.phi();

  constexpr std::size_t kBlock = 1024;
  std::vector<std::uint64_t> xs;
  std::vector<std::uint64_t> inverses(kBlock);
  std::vector<std::uint64_t> scratch;
  xs.reserve(kBlock);
  CompensatedComplexSum running;
  const double scale = 1.0 / mod.sqrt_q();

  std::uint64_t j = 1;
  while (j <= limit) {
    xs.clear();
    const std::uint64_t first_j = j;
    for (; j <= limit && xs.size() < kBlock; ++j) xs.push_back(unit_at(j, p));
    batch_inverse_into(xs, q, inverses, scratch);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::uint64_t phase = add_mod(mul_mod(params.a, xs[i], q), mul_mod(params.b, inverses[i], q), q);
      running.add(unit_root(phase, q));
      visit(PathPoint{first_j + i, xs[i], running.value() * scale});
    }
  }
}

}  // namespace klpath
