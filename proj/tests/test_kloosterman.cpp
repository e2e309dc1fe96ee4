#include <doctest.h>

#include <cmath>
#include <complex>

#include "klpath/errors.hpp"
#include "klpath/kloosterman.hpp"
#include "klpath/random_series.hpp"

using namespace klpath;

namespace {

using LComplex = std::complex<long double>;
constexpr long double kTwoPiL = 6.283185307179586476925286766559L;

// Independent oracle: long double exponentials, inverses by search.
LComplex kl_oracle(std::uint64_t p, unsigned n, std::uint64_t a, std::uint64_t b) {
  std::uint64_t q = 1;
  for (unsigned i = 0; i < n; ++i) q *= p;
  LComplex s = 0;
  for (std::uint64_t x = 1; x < q; ++x) {
    if (x % p == 0) continue;
    std::uint64_t inv = 1;
    while (x * inv % q != 1) ++inv;
    const long double arg = kTwoPiL * static_cast<long double>((a * x + b * inv) % q) / q;
    s += LComplex(std::cos(arg), std::sin(arg));
  }
  return s / std::sqrt(static_cast<long double>(q));
}

std::vector<std::uint64_t> units_of(const PrimePowerModulus& mod) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t x = 1; x < mod.q(); ++x) {
    if (mod.is_unit(x)) out.push_back(x);
  }
  return out;
}

KloostermanParams kp(std::uint64_t p, unsigned n, std::int64_t a, std::int64_t b) {
  return KloostermanParams(PrimePowerModulus(p, n), a, b);
}

}  // namespace

TEST_CASE("roots of unity") {
  CHECK(std::abs(unit_root(0, 7) - Complex(1, 0)) == 0.0);
  CHECK(std::abs(unit_root(1, 4) - Complex(0, 1)) < 1e-16);
  CHECK(std::abs(unit_root(3, 6) - Complex(-1, 0)) < 1e-16);
  // Symmetric representative: e(-k/m) is exactly the conjugate of e(k/m).
  for (std::uint64_t k = 1; k < 50; ++k) CHECK(unit_root(50 - k, 50) == std::conj(unit_root(k, 50)));
}

TEST_CASE("naive sums: frozen values") {
  // 2 cos(4 pi / 9): the six terms pair into 3 e(2/9) + 3 e(7/9).
  CHECK(kl_naive(kp(3, 2, 1, 1)).real() == doctest::Approx(0.34729635533386083).epsilon(1e-14));
  CHECK(std::abs(kl_naive(kp(3, 2, 2, 1))) < 1e-12);
  CHECK(kl_naive(kp(3, 1, 1, 1)).real() == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  // Frozen from a direct 18-term summation.
  CHECK(kl_naive(kp(3, 3, 1, 1)).real() == doctest::Approx(-0.8975983604009236).epsilon(1e-13));
  CHECK(kl_naive(kp(5, 2, 1, 1)).real() == doctest::Approx(1.7526133600877274).epsilon(1e-13));
  CHECK(kl_naive(kp(7, 3, 3, 5)).real() == doctest::Approx(1.1367092570131767).epsilon(1e-13));
}

TEST_CASE("naive sums against the long double oracle") {
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 1}, {3, 2}, {5, 2}, {7, 1}, {3, 3}}) {
    const PrimePowerModulus mod(p, n);
    for (std::uint64_t a = 0; a < mod.q(); ++a) {
      for (std::uint64_t b = 0; b < mod.q(); b += 2) {
        const auto oracle = kl_oracle(p, n, a, b);
        const Complex got = kl_naive(KloostermanParams(mod, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)));
        CHECK(std::abs(got.real() - static_cast<double>(oracle.real())) < 1e-12);
        CHECK(std::abs(got.imag() - static_cast<double>(oracle.imag())) < 1e-12);
      }
    }
  }
}

TEST_CASE("closed form") {
  CHECK(kl_closed(kp(3, 2, 1, 1)) == doctest::Approx(0.34729635533386083).epsilon(1e-14));
  CHECK(kl_closed(kp(3, 2, 3, 1)) == 0.0);
  CHECK(kl_closed(kp(3, 2, 2, 1)) == 0.0);
  CHECK(kl_closed(kp(3, 3, 1, 1)) == doctest::Approx(-0.8975983604009236).epsilon(1e-13));
  CHECK(kl_closed(kp(3, 2, 1, 3)) == 0.0);  // p | b

  CHECK_THROWS_AS(kl_closed(kp(3, 1, 1, 1)), UnsupportedRegime);
  CHECK_THROWS_AS(kl_closed(kp(5, 5, 1, 1)), UnsupportedRegime);  // p = 2n - 5 is rejected
  CHECK_THROWS_AS(kl_closed(kp(3, 4, 1, 1)), UnsupportedRegime);
  CHECK_FALSE(closed_form_supported(PrimePowerModulus(3, 4)));
  CHECK(closed_form_supported(PrimePowerModulus(3, 3)));
  CHECK(closed_form_supported(PrimePowerModulus(7, 5)));

  // kl_value falls back to summation outside the closed-form regime.
  CHECK(kl_value(kp(3, 1, 1, 1)) == doctest::Approx(-1.0 / std::sqrt(3.0)));
  CHECK(kl_value(kp(3, 5, 2, 7)) == doctest::Approx(kl_naive(kp(3, 5, 2, 7)).real()));
}

TEST_CASE("closed form equals direct summation, reality and bound") {
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 2}, {3, 3}, {5, 2}, {7, 2}, {13, 2}}) {
    const PrimePowerModulus mod(p, n);
    const auto units = units_of(mod);
    for (std::uint64_t a : units) {
      for (std::uint64_t b : units) {
        const KloostermanParams params(mod, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b));
        const Complex naive = kl_naive(params);
        const double closed = kl_closed(params);
        CHECK(std::abs(closed - naive.real()) <= 1e-9);
        CHECK(std::abs(naive.imag()) <= 1e-9);
        CHECK(std::abs(closed) <= 2.0);
      }
    }
  }
  // A larger exponent where p > 2n - 5 only just holds.
  const PrimePowerModulus big(7, 5);
  for (std::int64_t a : {1, 2, 3, 10, 12345}) {
    const KloostermanParams params(big, a, 1);
    CHECK(kl_closed(params) == doctest::Approx(kl_naive(params).real()).epsilon(1e-9));
  }
}

TEST_CASE("root choice does not matter") {
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 3}, {5, 2}, {7, 3}, {11, 2}, {13, 3}}) {
    const PrimePowerModulus mod(p, n);
    for (std::uint64_t s = 1; s < mod.q(); ++s) {
      if (!mod.is_unit(s)) continue;
      CHECK(kl_closed_from_root(s, mod) == kl_closed_from_root(mod.q() - s, mod));
    }
  }
}

TEST_CASE("multiplicative reduction") {
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 2}, {5, 2}, {7, 2}}) {
    const PrimePowerModulus mod(p, n);
    for (std::uint64_t a = 0; a < mod.q(); ++a) {
      for (std::uint64_t b : units_of(mod)) {
        const Complex lhs = kl_naive(KloostermanParams(mod, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)));
        const Complex rhs = kl_naive(KloostermanParams(mod, static_cast<std::int64_t>(a * b), 1));
        CHECK(std::abs(lhs - rhs) < 1e-9);
      }
    }
  }
}

TEST_CASE("partial sums") {
  const auto params = kp(3, 2, 1, 1);
  const auto pts = partial_sums(params);
  REQUIRE(pts.size() == 6);
  const std::vector<std::uint64_t> xs = {1, 2, 4, 5, 7, 8};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(pts[i].j == i + 1);
    CHECK(pts[i].x == xs[i]);
  }
  CHECK(std::abs(pts[0].value - unit_root(2, 9) / 3.0) < 1e-15);
  CHECK(pts[5].value.real() == doctest::Approx(0.34729635533386083).epsilon(1e-14));

  CHECK_THROWS_AS(partial_sums(kp(3, 2, 3, 1)), NotCoprime);
  CHECK_THROWS_AS(partial_sums(kp(3, 2, 1, 6)), NotCoprime);

  // Step lengths, endpoint and enumeration, beyond one batch-inversion block.
  for (auto [p, n, a, b] : std::vector<std::tuple<std::uint64_t, unsigned, std::int64_t, std::int64_t>>{
           {5, 3, 2, 3}, {31, 2, 7, 11}, {13, 3, 1, 1}}) {
    const PrimePowerModulus mod(p, n);
    const KloostermanParams par(mod, a, b);
    const auto path = partial_sums(par);
    REQUIRE(path.size() == mod.phi());
    const double step = 1.0 / mod.sqrt_q();
    for (std::size_t i = 0; i < path.size(); ++i) {
      CHECK(path[i].x == path[i].j + (path[i].j - 1) / (p - 1));
      CHECK(path[i].x % p != 0);
      if (i > 0) CHECK(std::abs(std::abs(path[i].value - path[i - 1].value) - step) <= 1e-12 * step);
    }
    CHECK(std::abs(path.back().value - kl_naive(par)) < 1e-12);
    const auto poly = path_polyline(par);
    REQUIRE(poly.size() == path.size());
    CHECK(poly[17] == path[17].value);
  }
}

TEST_CASE("path evaluation") {
  const auto params = kp(3, 2, 1, 1);
  const auto pts = partial_sums(params);
  CHECK(std::abs(path_eval(0.0, params) - unit_root(2, 9) / 3.0) < 1e-15);
  CHECK(path_eval(1.0, params).real() == doctest::Approx(0.34729635533386083).epsilon(1e-14));
  CHECK(std::abs(path_eval(0.4, params) - pts[2].value) < 1e-15);  // (3 - 1) / (6 - 1)
  CHECK(std::abs(path_eval(0.5, params) - 0.5 * (pts[2].value + pts[3].value)) < 1e-15);
  CHECK_THROWS_AS(path_eval(-0.1, params), DomainError);
  CHECK_THROWS_AS(path_eval(1.1, params), DomainError);
  CHECK_THROWS_AS(path_eval(std::nan(""), params), DomainError);

  // Segment formula alpha_j (t - (j - 1)/(phi - 1)) + z_j and the two bounds.
  const PrimePowerModulus mod(11, 2);
  const KloostermanParams par(mod, 5, 7);
  const auto vertices = path_polyline(par);
  const double phi = static_cast<double>(mod.phi());
  CounterRng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform();
    const auto j = static_cast<std::size_t>(std::max(1.0, std::ceil((phi - 1) * t)));
    const Complex alpha = (phi - 1) * (vertices[j] - vertices[j - 1]);
    CHECK(std::abs(alpha) <= (phi - 1) / mod.sqrt_q() * (1 + 1e-12));
    const Complex expected = alpha * (t - (static_cast<double>(j) - 1) / (phi - 1)) + vertices[j - 1];
    const Complex got = path_eval(t, par);
    CHECK(std::abs(got - expected) < 1e-12);
    CHECK(got == path_eval(t, vertices));
    CHECK(std::abs(got - vertices[j - 1]) <= 1.0 / mod.sqrt_q() * (1 + 1e-12));
  }
}

TEST_CASE("step endpoint") {
  const PrimePowerModulus mod(3, 2);
  CHECK(step_endpoint(0.0, mod) == 0);
  CHECK(step_endpoint(1.0, mod) == 8);
  // t = 1/2: block k = 2, floor(6 / 2) + 2 - 1 = 4.
  CHECK(step_endpoint(0.5, mod) == 4);
  CHECK_THROWS_AS(step_endpoint(1.5, mod), DomainError);
}

TEST_CASE("Fourier coefficients") {
  // Direct geometric sums as the oracle.
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 2}, {5, 2}, {3, 3}}) {
    const PrimePowerModulus mod(p, n);
    const auto half = static_cast<std::int64_t>((mod.q() - 1) / 2);
    for (double t : {0.0, 0.1, 0.33, 0.5, 0.77, 1.0}) {
      const std::uint64_t m = step_endpoint(t, mod);
      for (std::int64_t h = -half; h <= half; ++h) {
        Complex direct = 0.0;
        for (std::uint64_t x = 1; x <= m; ++x) direct += unit_root(mod.reduce(h * static_cast<std::int64_t>(x)), mod.q());
        direct /= mod.sqrt_q();
        const Complex alpha = fourier_alpha(h, t, mod);
        CHECK(std::abs(alpha - direct) < 1e-12);
        const double bound = mod.sqrt_q() * std::min(1.0, h == 0 ? 1.0 : 1.0 / (2.0 * std::abs(static_cast<double>(h))));
        CHECK(std::abs(alpha) <= bound);
      }
    }
  }
  const PrimePowerModulus m9(3, 2);
  CHECK(fourier_alpha(0, 0.5, m9) == Complex(4.0 / 3.0, 0.0));
  // Full range 1..q-1 sums to -1 for h != 0.
  CHECK(std::abs(fourier_alpha(2, 1.0, m9) - Complex(-1.0 / 3.0, 0.0)) < 1e-15);
  CHECK(fourier_alpha(4, 0.0, m9) == Complex(0.0, 0.0));
}

TEST_CASE("beta coefficients") {
  CHECK(beta_coeff(0, 0.3) == Complex(0.3, 0.0));
  CHECK(std::abs(beta_coeff(1, 1.0)) < 1e-16);
  CHECK(std::abs(beta_coeff(2, 0.25) - Complex(0.0, 1.0 / (2.0 * kPi))) < 1e-16);
  for (std::int64_t h : {-7, -1, 1, 3, 1000}) {
    for (double t : {0.1, 0.37, 0.9}) {
      const double arg = 2.0 * kPi * static_cast<double>(h) * t;
      const Complex expected = (Complex(std::cos(arg), std::sin(arg)) - 1.0) / (Complex(0.0, 2.0 * kPi) * static_cast<double>(h));
      CHECK(std::abs(beta_coeff(h, t) - expected) < 1e-12);
    }
  }
}

TEST_CASE("Fourier coefficients approach beta") {
  constexpr double kC0 = 8.0;
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{
           {3, 2}, {5, 2}, {3, 3}, {7, 2}, {11, 2}, {5, 3}, {13, 2}, {7, 3}}) {
    const PrimePowerModulus mod(p, n);
    const auto half = static_cast<std::int64_t>((mod.q() - 1) / 2);
    double worst = 0.0;
    for (int g = 0; g <= 40; ++g) {
      const double t = g / 40.0;
      for (std::int64_t h = -half; h <= half; ++h) {
        const Complex scaled = fourier_alpha(h, t, mod) / mod.sqrt_q();
        worst = std::max(worst, std::abs(scaled - beta_coeff(h, t)) * static_cast<double>(mod.q()));
      }
    }
    CHECK(worst <= kC0);
  }
}

TEST_CASE("step function: direct against completion") {
  const auto params = kp(3, 2, 1, 1);
  CHECK(completed_step(0.0, params) == Complex(0.0, 0.0));
  CHECK(std::abs(completed_step(1.0, params) - kl_naive(params)) < 1e-14);
  CHECK(std::abs(completed_step(0.5, params, StepMethod::direct) -
                 completed_step(0.5, params, StepMethod::completion)) < 1e-10);
  CHECK_THROWS_AS(completed_step(0.5, kp(3, 2, 3, 1)), NotCoprime);

  CounterRng rng(5);
  for (auto [p, n] : std::vector<std::pair<std::uint64_t, unsigned>>{{5, 2}, {3, 3}, {7, 2}, {5, 3}, {13, 2}}) {
    const PrimePowerModulus mod(p, n);
    for (int i = 0; i < 15; ++i) {
      std::int64_t a;
      std::int64_t b;
      do {
        a = static_cast<std::int64_t>(rng.next() % mod.q());
        b = static_cast<std::int64_t>(rng.next() % mod.q());
      } while (!mod.is_unit(static_cast<std::uint64_t>(a)) || !mod.is_unit(static_cast<std::uint64_t>(b)));
      const KloostermanParams par(mod, a, b);
      const double t = 1.0 - rng.uniform();
      const Complex direct = completed_step(t, par, StepMethod::direct);
      const Complex completion = completed_step(t, par, StepMethod::completion);
      CHECK(std::abs(direct - completion) <= 1e-8 * (1 + std::log(static_cast<double>(mod.q()))));
      // The step function stays within 6 / p^(n/2) of the path.
      CHECK(std::abs(path_eval(t, par) - direct) <= 6.0 / mod.sqrt_q());
    }
  }
}

TEST_CASE("phase table") {
  const PrimePowerModulus mod(5, 3);
  const PhaseTable table(mod);
  for (std::uint64_t x = 1; x < mod.q(); ++x) {
    CHECK(table.root(x) == unit_root(x, mod.q()));
    if (mod.is_unit(x)) {
      CHECK(table.inverse(x) == mod_inverse(x, mod));
    } else {
      CHECK(table.inverse(x) == 0);
    }
  }
}
