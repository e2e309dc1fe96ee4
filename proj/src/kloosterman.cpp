#include "klpath/kloosterman.hpp"

#include <algorithm>
#include <cmath>

namespace klpath {

Complex unit_root(std::uint64_t k, std::uint64_t m) {
  k %= m;
  if (2 * k == m) return {-1.0, 0.0};
  const std::int64_t rep = k > m / 2 ? -static_cast<std::int64_t>(m - k) : static_cast<std::int64_t>(k);
  const double angle = 2.0 * kPi * static_cast<double>(rep) / static_cast<double>(m);
  return {std::cos(angle), std::sin(angle)};
}

PhaseTable::PhaseTable(const PrimePowerModulus& mod) : mod_(mod) {
  const std::uint64_t q = mod.q();
  if (q > kMaxModulus) throw ResourceLimit("phase table refused for q above 5e7");
  roots_.resize(q);
  for (std::uint64_t k = 0; k < q; ++k) roots_[k] = unit_root(k, q);
  inverses_.assign(q, 0);
  // Inverses of all units from the prefix-product trick, block by block.
  std::vector<std::uint64_t> xs;
  std::vector<std::uint64_t> out(1024);
  std::vector<std::uint64_t> scratch;
  for (std::uint64_t start = 1; start < q;) {
    xs.clear();
    for (; start < q && xs.size() < 1024; ++start) {
      if (start % mod.p() != 0) xs.push_back(start);
    }
    batch_inverse_into(xs, q, out, scratch);
    for (std::size_t i = 0; i < xs.size(); ++i) inverses_[xs[i]] = out[i];
  }
}

Complex kl_naive(const KloostermanParams& params) {
  const auto& mod = params.mod;
  const std::uint64_t q = mod.q();
  const std::uint64_t p = mod.p();
  constexpr std::size_t kBlock = 1024;
  std::vector<std::uint64_t> xs;
  std::vector<std::uint64_t> inverses(kBlock);
  std::vector<std::uint64_t> scratch;
  CompensatedComplexSum sum;
  std::uint64_t j = 1;
  while (j <= mod.phi()) {
    xs.clear();
    for (; j <= mod.phi() && xs.size() < kBlock; ++j) xs.push_back(unit_at(j, p));
    batch_inverse_into(xs, q, inverses, scratch);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sum.add(unit_root(add_mod(mul_mod(params.a, xs[i], q), mul_mod(params.b, inverses[i], q), q), q));
    }
  }
  return sum.value() / mod.sqrt_q();
}

bool closed_form_supported(const PrimePowerModulus& mod) noexcept {
  return mod.n() >= 2 && static_cast<std::int64_t>(mod.p()) > 2 * static_cast<std::int64_t>(mod.n()) - 5;
}

double kl_closed_from_root(std::uint64_t s, const PrimePowerModulus& mod) {
  const std::uint64_t q = mod.q();
  const int symbol = jacobi_symbol(static_cast<std::int64_t>(s % q), q);
  const Complex phase = unit_root(mul_mod(2, s % q, q), q);  // e(2s/q) = exp(i 4 pi s / q)
  const bool shifted = mod.n() % 2 == 1 && mod.p() % 4 == 3;
  // cos(x + pi/2) = -sin(x)
  const double trig = shifted ? -phase.imag() : phase.real();
  return 2.0 * symbol * trig;
}

double kl_closed(const KloostermanParams& params) {
  const auto& mod = params.mod;
  if (!closed_form_supported(mod)) {
    throw UnsupportedRegime("closed form needs n >= 2 and p > 2n - 5");
  }
  // Kl(a, b) = Kl(ab, 1) after x -> bx for b a unit; for p | b both sides
  // vanish when n >= 2 since ab is then divisible by p.
  const std::uint64_t c = mul_mod(params.a, params.b, mod.q());
  if (!mod.is_unit(c)) return 0.0;
  const auto s = sqrt_mod_prime_power(c, mod);
  if (!s) return 0.0;
  return kl_closed_from_root(*s, mod);
}

double kl_value(const KloostermanParams& params) {
  if (closed_form_supported(params.mod)) return kl_closed(params);
  return kl_naive(params).real();
}

std::vector<PathPoint> partial_sums(const KloostermanParams& params) {
  std::vector<PathPoint> points;
  points.reserve(params.mod.phi());
  partial_sums_stream(params, [&](const PathPoint& pt) { points.push_back(pt); });
  return points;
}

std::vector<Complex> path_polyline(const KloostermanParams& params) {
  std::vector<Complex> vertices;
  vertices.reserve(params.mod.phi());
  partial_sums_stream(params, [&](const PathPoint& pt) { vertices.push_back(pt.value); });
  return vertices;
}

SegmentPosition path_segment(double t, std::uint64_t phi) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("path parameter must lie in [0, 1]");
  const double scaled = static_cast<double>(phi - 1) * t;
  auto j = static_cast<std::uint64_t>(std::ceil(scaled));
  j = std::clamp<std::uint64_t>(j, 1, phi - 1);
  const double fraction = std::clamp(scaled - static_cast<double>(j - 1), 0.0, 1.0);
  return {j, fraction};
}

Complex path_eval(double t, std::span<const Complex> vertices) {
  const auto pos = path_segment(t, vertices.size());
  const Complex& zj = vertices[pos.j - 1];
  const Complex& zk = vertices[pos.j];
  return zj + (zk - zj) * pos.fraction;
}

Complex path_eval(double t, const KloostermanParams& params) {
  const auto pos = path_segment(t, params.mod.phi());
  Complex zj;
  Complex zk;
  partial_sums_stream(
      params,
      [&](const PathPoint& pt) {
        if (pt.j == pos.j) zj = pt.value;
        if (pt.j == pos.j + 1) zk = pt.value;
      },
      pos.j + 1);
  return zj + (zk - zj) * pos.fraction;
}

std::uint64_t step_endpoint(double t, const PrimePowerModulus& mod) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("step parameter must lie in [0, 1]");
  const std::uint64_t blocks = mod.block_count();
  auto k = static_cast<std::uint64_t>(std::ceil(t * static_cast<double>(blocks)));
  k = std::clamp<std::uint64_t>(k, 1, blocks);
  const auto covered = static_cast<std::uint64_t>(std::floor(static_cast<double>(mod.phi()) * t));
  return std::min(covered + k - 1, mod.q() - 1);
}

Complex fourier_alpha(std::int64_t h, double t, const PrimePowerModulus& mod) {
  const std::uint64_t q = mod.q();
  const std::uint64_t terms = step_endpoint(t, mod);
  const std::uint64_t hr = mod.reduce(h);
  if (hr == 0) return static_cast<double>(terms) / mod.sqrt_q();
  // sum_{x=1}^{M} e(hx/q) = e(h(M+1)/(2q)) sin(pi h M / q) / sin(pi h / q)
  const std::uint64_t two_q = 2 * q;
  auto sin_pi_over_q = [&](std::uint64_t r) {
    // sin(pi r / q) for r in [0, 2q), argument folded into [-pi, pi]
    const std::int64_t rep = r > q ? -static_cast<std::int64_t>(two_q - r) : static_cast<std::int64_t>(r);
    return std::sin(kPi * static_cast<double>(rep) / static_cast<double>(q));
  };
  const auto hm = static_cast<std::uint64_t>((static_cast<unsigned __int128>(hr) * terms) % two_q);
  const auto hm1 = static_cast<std::uint64_t>((static_cast<unsigned __int128>(hr) * (terms + 1)) % two_q);
  const double ratio = sin_pi_over_q(hm) / sin_pi_over_q(hr);
  return unit_root(hm1, two_q) * ratio / mod.sqrt_q();
}

Complex beta_coeff(std::int64_t h, double t) {
  if (h == 0) return t;
  // (e(ht) - 1) / (2 pi i h) = e(ht/2) sin(pi h t) / (pi h)
  const double r = std::remainder(static_cast<double>(h) * t, 2.0);
  // sin(pi) is not exactly zero in floating point; integer ht must give 0.
  if (r == std::trunc(r)) return 0.0;
  const double half_angle = kPi * r;
  return std::polar(1.0, half_angle) * (std::sin(half_angle) / (kPi * static_cast<double>(h)));
}

Complex completed_step(double t, const KloostermanParams& params, StepMethod method) {
  const auto& mod = params.mod;
  if (!mod.is_unit(params.a) || !mod.is_unit(params.b)) {
    throw NotCoprime("step function needs gcd(a, p) = gcd(b, p) = 1");
  }
  const std::uint64_t endpoint = step_endpoint(t, mod);
  if (method == StepMethod::direct) {
    if (endpoint == 0) return 0.0;
    // Units up to the endpoint: endpoint - floor(endpoint / p) of them.
    const std::uint64_t count = endpoint - endpoint / mod.p();
    if (count == 0) return 0.0;
    Complex last;
    partial_sums_stream(params, [&](const PathPoint& pt) { last = pt.value; }, count);
    return last;
  }
  const auto half = static_cast<std::int64_t>((mod.q() - 1) / 2);
  CompensatedComplexSum sum;
  for (std::int64_t h = -half; h <= half; ++h) {
    const KloostermanParams shifted(mod, static_cast<std::int64_t>(params.a) - h, static_cast<std::int64_t>(params.b));
    const double kl = kl_value(shifted);
    if (kl == 0.0) continue;
    sum.add(fourier_alpha(h, t, mod) * kl);
  }
  return sum.value() / mod.sqrt_q();
}

}  // namespace klpath
