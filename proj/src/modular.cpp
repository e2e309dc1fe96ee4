#include "klpath/modular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "klpath/errors.hpp"

namespace klpath {

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  if (m == 1) return 0;
  std::uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1U) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1U;
  }
  return result;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  static constexpr std::array<std::uint64_t, 12> kBases = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (std::uint64_t b : kBases) {
    if (n % b == 0) return n == b;
  }
  std::uint64_t d = n - 1;
  unsigned r = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++r;
  }
  // These twelve bases are a deterministic witness set for all n < 3.3e24.
  for (std::uint64_t b : kBases) {
    std::uint64_t x = pow_mod(b, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned i = 1; i < r; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

unsigned p_adic_valuation(std::uint64_t x, std::uint64_t p) {
  unsigned v = 0;
  while (x != 0 && x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

std::optional<std::uint64_t> inverse_mod(std::uint64_t x, std::uint64_t m) {
  if (m == 1) return 0;
  std::int64_t old_r = static_cast<std::int64_t>(x % m);
  std::int64_t r = static_cast<std::int64_t>(m);
  std::int64_t old_s = 1;
  std::int64_t s = 0;
  while (r != 0) {
    const std::int64_t quotient = old_r / r;
    std::int64_t tmp = old_r - quotient * r;
    old_r = r;
    r = tmp;
    tmp = old_s - quotient * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) return std::nullopt;
  return reduce_signed(old_s, m);
}

PrimePowerModulus::PrimePowerModulus(std::uint64_t p, unsigned n) : p_(p), n_(n) {
  if (n == 0) throw InvalidModulus("exponent n must be at least 1");
  if (p < 3 || (p & 1U) == 0 || !is_prime(p)) {
    throw InvalidModulus("p = " + std::to_string(p) + " is not an odd prime");
  }
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 62;
  std::uint64_t q = 1;
  for (unsigned i = 0; i < n; ++i) {
    if (q > kLimit / p) throw InvalidModulus("p^n must stay below 2^62");
    q *= p;
  }
  if (q >= kLimit) throw InvalidModulus("p^n must stay below 2^62");
  q_ = q;
  phi_ = (q / p) * (p - 1);
  sqrt_q_ = 1.0;
  for (unsigned i = 0; i < n; ++i) sqrt_q_ *= static_cast<double>(p);
  sqrt_q_ = std::sqrt(sqrt_q_);
}

std::uint64_t mod_inverse(std::uint64_t x, const PrimePowerModulus& mod) {
  x %= mod.q();
  if (!mod.is_unit(x)) {
    throw NotInvertible(std::to_string(x) + " is not invertible modulo " + std::to_string(mod.q()));
  }
  return *inverse_mod(x, mod.q());
}

void batch_inverse_into(std::span<const std::uint64_t> xs, std::uint64_t m,
                        std::span<std::uint64_t> out, std::vector<std::uint64_t>& scratch) {
  const std::size_t k = xs.size();
  if (k == 0) return;
  scratch.resize(k);
  scratch[0] = xs[0] % m;
  for (std::size_t i = 1; i < k; ++i) scratch[i] = mul_mod(scratch[i - 1], xs[i], m);
  const auto total_inv = inverse_mod(scratch[k - 1], m);
  if (!total_inv) {
    for (std::size_t i = 0; i < k; ++i) {
      if (!inverse_mod(xs[i], m)) {
        throw NotInvertible("entry " + std::to_string(i) + " (" + std::to_string(xs[i]) +
                                ") is not invertible modulo " + std::to_string(m),
                            i);
      }
    }
  }
  std::uint64_t running = *total_inv;
  for (std::size_t i = k - 1; i > 0; --i) {
    out[i] = mul_mod(running, scratch[i - 1], m);
    running = mul_mod(running, xs[i], m);
  }
  out[0] = running;
}

std::vector<std::uint64_t> batch_inverse(std::span<const std::uint64_t> xs,
                                         const PrimePowerModulus& mod) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!mod.is_unit(xs[i] % mod.q())) {
      throw NotInvertible("entry " + std::to_string(i) + " (" + std::to_string(xs[i]) +
                              ") is not invertible modulo " + std::to_string(mod.q()),
                          i);
    }
  }
  std::vector<std::uint64_t> out(xs.size());
  std::vector<std::uint64_t> scratch;
  batch_inverse_into(xs, mod.q(), out, scratch);
  return out;
}

int jacobi_symbol(std::int64_t x, std::uint64_t m) {
  if (m == 0 || (m & 1U) == 0) throw PreconditionViolated("Jacobi symbol needs an odd positive modulus");
  std::uint64_t a = reduce_signed(x, m);
  std::uint64_t n = m;
  int result = 1;
  while (a != 0) {
    while ((a & 1U) == 0) {
      a >>= 1U;
      const std::uint64_t r = n & 7U;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if ((a & 3U) == 3 && (n & 3U) == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

std::optional<std::uint64_t> sqrt_mod_p(std::int64_t a_signed, std::uint64_t p) {
  const std::uint64_t a = reduce_signed(a_signed, p);
  if (a == 0) return 0;
  if (jacobi_symbol(static_cast<std::int64_t>(a), p) != 1) return std::nullopt;

  std::uint64_t root = 0;
  if ((p & 3U) == 3) {
    root = pow_mod(a, (p + 1) / 4, p);
  } else {
    std::uint64_t q = p - 1;
    unsigned s = 0;
    while ((q & 1U) == 0) {
      q >>= 1U;
      ++s;
    }
    std::uint64_t z = 2;
    while (jacobi_symbol(static_cast<std::int64_t>(z), p) != -1) ++z;
    std::uint64_t c = pow_mod(z, q, p);
    std::uint64_t r = pow_mod(a, (q + 1) / 2, p);
    std::uint64_t t = pow_mod(a, q, p);
    unsigned m = s;
    while (t != 1) {
      unsigned i = 0;
      std::uint64_t t2 = t;
      while (t2 != 1) {
        t2 = mul_mod(t2, t2, p);
        ++i;
      }
      std::uint64_t b = c;
      for (unsigned j = 0; j + 1 < m - i; ++j) b = mul_mod(b, b, p);
      r = mul_mod(r, b, p);
      c = mul_mod(b, b, p);
      t = mul_mod(t, c, p);
      m = i;
    }
    root = r;
  }
  return root <= (p - 1) / 2 ? root : p - root;
}

namespace {

void check_series_precision(const PrimePowerModulus& mod) {
  if (static_cast<std::int64_t>(mod.p()) < 2 * static_cast<std::int64_t>(mod.n()) - 5) {
    throw PrecisionUnsupported("p-adic square-root series needs p >= 2n - 5");
  }
}

std::uint64_t sqrt_by_lifting(std::uint64_t a, std::uint64_t b, const PrimePowerModulus& mod) {
  const std::uint64_t p = mod.p();
  std::uint64_t s = b;
  std::uint64_t pj = p;
  for (unsigned j = 1; j < mod.n(); ++j) {
    const std::uint64_t next = pj * p;
    // s^2 = a mod p^j; solve (s + p^j t)^2 = a mod p^(j+1) for t.
    const std::uint64_t defect = sub_mod(mul_mod(s, s, next), a % next, next) / pj;
    const std::uint64_t inv_two_s = *inverse_mod(mul_mod(2, s, p), p);
    const std::uint64_t t = sub_mod(0, mul_mod(defect % p, inv_two_s, p), p);
    s += pj * t;
    pj = next;
  }
  return s;
}

std::vector<std::uint64_t> series_coefficients(const PrimePowerModulus& mod) {
  // c_m = (-1)^(m-1) Catalan(m-1) / 2^(2m-1) for m >= 1. Only powers of two
  // are divided out, so the reduction is exact for every odd p.
  const std::uint64_t q = mod.q();
  const unsigned n = mod.n();
  std::vector<std::uint64_t> catalan(n, 0);
  if (n > 0) catalan[0] = 1 % q;
  for (unsigned k = 1; k < n; ++k) {
    std::uint64_t acc = 0;
    for (unsigned i = 0; i < k; ++i) acc = add_mod(acc, mul_mod(catalan[i], catalan[k - 1 - i], q), q);
    catalan[k] = acc;
  }
  const std::uint64_t inv_two = (q + 1) / 2;
  std::vector<std::uint64_t> coeffs(n, 0);
  coeffs[0] = 1 % q;
  std::uint64_t inv_pow = inv_two;  // 2^-(2m-1)
  const std::uint64_t inv_four = mul_mod(inv_two, inv_two, q);
  for (unsigned m = 1; m < n; ++m) {
    std::uint64_t c = mul_mod(catalan[m - 1], inv_pow, q);
    if ((m - 1) % 2 == 1) c = sub_mod(0, c, q);
    coeffs[m] = c;
    inv_pow = mul_mod(inv_pow, inv_four, q);
  }
  return coeffs;
}

std::uint64_t sqrt_by_series(std::uint64_t a, std::uint64_t b, const PrimePowerModulus& mod) {
  const std::uint64_t q = mod.q();
  const auto coeffs = series_coefficients(mod);
  const std::uint64_t b_inv = mod_inverse(b, mod);
  // a = b^2 + pk, so a = b^2 (1 + x) with x = b^-2 p k lying in pZ.
  const std::uint64_t x = mul_mod(sub_mod(a, mul_mod(b, b, q), q), mul_mod(b_inv, b_inv, q), q);
  std::uint64_t sum = 0;
  std::uint64_t x_pow = 1 % q;
  for (std::uint64_t c : coeffs) {
    sum = add_mod(sum, mul_mod(c, x_pow, q), q);
    x_pow = mul_mod(x_pow, x, q);
  }
  return mul_mod(b, sum, q);
}

}  // namespace

std::optional<std::uint64_t> sqrt_mod_prime_power(std::uint64_t a, const PrimePowerModulus& mod,
                                                  SqrtMethod method) {
  a %= mod.q();
  if (!mod.is_unit(a)) {
    throw NotCoprime("square root of " + std::to_string(a) + " modulo " + std::to_string(mod.q()) +
                     " needs gcd(a, p) = 1");
  }
  if (method == SqrtMethod::padic_series) check_series_precision(mod);
  const auto b = sqrt_mod_p(static_cast<std::int64_t>(a % mod.p()), mod.p());
  if (!b) return std::nullopt;
  return method == SqrtMethod::hensel ? sqrt_by_lifting(a, *b, mod) : sqrt_by_series(a, *b, mod);
}

std::vector<std::uint64_t> padic_sqrt_coeffs(const PrimePowerModulus& mod) {
  check_series_precision(mod);
  return series_coefficients(mod);
}

IntPolynomial::IntPolynomial(std::vector<std::int64_t> coefficients) : coeffs_(std::move(coefficients)) {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

IntPolynomial IntPolynomial::derivative() const {
  std::vector<std::int64_t> d;
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d.push_back(coeffs_[i] * static_cast<std::int64_t>(i));
  return IntPolynomial(std::move(d));
}

std::uint64_t IntPolynomial::eval_mod(std::uint64_t x, std::uint64_t m) const {
  std::uint64_t acc = 0;
  x %= m;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = add_mod(mul_mod(acc, x, m), reduce_signed(*it, m), m);
  }
  return acc;
}

std::vector<std::uint64_t> hensel_lift_roots(const IntPolynomial& f, std::uint64_t p, unsigned k) {
  if (k == 0) throw PreconditionViolated("target exponent must be at least 1");
  const PrimePowerModulus target(p, k);
  const bool degenerate = std::all_of(f.coefficients().begin(), f.coefficients().end(),
                                      [&](std::int64_t c) { return reduce_signed(c, target.q()) == 0; });
  if (degenerate) throw PreconditionViolated("polynomial vanishes identically modulo p^k");

  const IntPolynomial df = f.derivative();
  std::vector<std::uint64_t> roots;
  for (std::uint64_t x = 0; x < p; ++x) {
    if (f.eval_mod(x, p) == 0) roots.push_back(x);
  }
  std::uint64_t pj = p;
  std::vector<std::uint64_t> next_roots;
  for (unsigned j = 1; j < k; ++j) {
    const std::uint64_t next = pj * p;
    next_roots.clear();
    for (std::uint64_t x0 : roots) {
      const std::uint64_t fx = f.eval_mod(x0, next);
      const std::uint64_t dfx = df.eval_mod(x0, p);
      if (dfx != 0) {
        const std::uint64_t t = sub_mod(0, mul_mod((fx / pj) % p, *inverse_mod(dfx, p), p), p);
        next_roots.push_back(x0 + pj * t);
      } else if (fx == 0) {
        for (std::uint64_t t = 0; t < p; ++t) next_roots.push_back(x0 + pj * t);
      }
    }
    roots.swap(next_roots);
    pj = next;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::uint64_t count_quadratic_roots_closed(std::int64_t pi, const PrimePowerModulus& mod) {
  const std::uint64_t diff = sub_mod(mod.reduce(pi), 1 % mod.q(), mod.q());
  if (diff % mod.p() != 0) throw PreconditionViolated("closed census needs p | pi - 1");
  const unsigned n = mod.n();
  const unsigned ell = diff == 0 ? n : std::min(p_adic_valuation(diff, mod.p()), n);
  auto p_pow = [&](unsigned e) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) r *= mod.p();
    return r;
  };
  if (n % 2 == 0) {
    if (ell + 1 <= n / 2) return 2 * p_pow(ell);
    return p_pow(n / 2);
  }
  if (ell <= (n - 1) / 2) return 2 * p_pow(ell);
  return p_pow((n - 1) / 2);
}

}  // namespace klpath
