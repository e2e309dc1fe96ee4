#pragma once

// Exact arithmetic in Z/p^nZ for odd primes p.
//
// Residues are plain std::uint64_t values in [0, q). Products go through
// 128-bit intermediates, which is why moduli are capped below 2^62.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace klpath {

bool is_prime(std::uint64_t n);

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  const std::uint64_t s = a + b;
  return s >= m ? s - m : s;
}

inline std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return a >= b ? a - b : a + (m - b);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

// Reduces a signed integer into [0, m).
inline std::uint64_t reduce_signed(std::int64_t x, std::uint64_t m) {
  const std::int64_t r = x % static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(m) : r);
}

// Largest v with p^v | x; x must be nonzero.
unsigned p_adic_valuation(std::uint64_t x, std::uint64_t p);

// Inverse modulo an arbitrary m >= 1 via the extended Euclidean algorithm.
// Returns nullopt if gcd(x, m) != 1.
std::optional<std::uint64_t> inverse_mod(std::uint64_t x, std::uint64_t m);

// An odd prime power q = p^n together with its totient.
class PrimePowerModulus {
 public:
  PrimePowerModulus(std::uint64_t p, unsigned n);

  std::uint64_t p() const noexcept { return p_; }
  unsigned n() const noexcept { return n_; }
  std::uint64_t q() const noexcept { return q_; }
  std::uint64_t phi() const noexcept { return phi_; }
  // p^(n-1); the number of blocks of p - 1 consecutive units.
  std::uint64_t block_count() const noexcept { return q_ / p_; }
  // p^(n/2) as a double, the Kloosterman normalisation.
  double sqrt_q() const noexcept { return sqrt_q_; }

  std::uint64_t reduce(std::int64_t x) const { return reduce_signed(x, q_); }
  bool is_unit(std::uint64_t x) const noexcept { return x % p_ != 0; }

  friend bool operator==(const PrimePowerModulus&, const PrimePowerModulus&) = default;

 private:
  std::uint64_t p_;
  unsigned n_;
  std::uint64_t q_;
  std::uint64_t phi_;
  double sqrt_q_;
};

// Throws NotInvertible if p | x.
std::uint64_t mod_inverse(std::uint64_t x, const PrimePowerModulus& mod);

// Prefix-product inversion: one modular inverse and 3(k-1) products.
// Throws NotInvertible carrying the index of the first non-unit entry.
std::vector<std::uint64_t> batch_inverse(std::span<const std::uint64_t> xs,
                                         const PrimePowerModulus& mod);

// In-place variant used by the streaming kernels; `scratch` is resized as needed.
void batch_inverse_into(std::span<const std::uint64_t> xs, std::uint64_t m,
                        std::span<std::uint64_t> out, std::vector<std::uint64_t>& scratch);

// Jacobi symbol (x / m) for odd m >= 1.
int jacobi_symbol(std::int64_t x, std::uint64_t m);

// Square root modulo an odd prime by Tonelli-Shanks. A nonzero residue yields
// the root in {1, ..., (p-1)/2}; p | a yields 0; non-residues yield nullopt.
std::optional<std::uint64_t> sqrt_mod_p(std::int64_t a, std::uint64_t p);

enum class SqrtMethod {
  hensel,        // Newton lifting p -> p^2 -> ... -> p^n
  padic_series,  // truncated binomial series for sqrt(1 + x), x in pZ
};

// Root s of s^2 = a (mod p^n) with s mod p in {1, ..., (p-1)/2}, or nullopt
// when a is a non-residue. Throws NotCoprime if p | a. The series method
// throws PrecisionUnsupported when p < 2n - 5.
std::optional<std::uint64_t> sqrt_mod_prime_power(std::uint64_t a, const PrimePowerModulus& mod,
                                                  SqrtMethod method = SqrtMethod::hensel);

// Coefficients c'_0, ..., c'_{n-1} of sqrt(1 + x) = sum c_m x^m reduced mod q.
// Throws PrecisionUnsupported when p < 2n - 5.
std::vector<std::uint64_t> padic_sqrt_coeffs(const PrimePowerModulus& mod);

// Polynomial with integer coefficients, constant term first.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<std::int64_t> coefficients);

  const std::vector<std::int64_t>& coefficients() const noexcept { return coeffs_; }
  // -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }

  IntPolynomial derivative() const;
  std::uint64_t eval_mod(std::uint64_t x, std::uint64_t m) const;

 private:
  std::vector<std::int64_t> coeffs_;
};

// All roots of f modulo p^k, sorted, by lifting the roots modulo p one power
// at a time. Throws PreconditionViolated if f vanishes identically mod p^k.
std::vector<std::uint64_t> hensel_lift_roots(const IntPolynomial& f, std::uint64_t p, unsigned k);

// Number of roots of X^2 - (pi + 1) X + pi modulo p^n given p | pi - 1, from
// the closed-form census in terms of l = min(v_p(pi - 1), n).
std::uint64_t count_quadratic_roots_closed(std::int64_t pi, const PrimePowerModulus& mod);

}  // namespace klpath
