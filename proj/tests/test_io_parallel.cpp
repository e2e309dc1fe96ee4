#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "klpath/accumulate.hpp"
#include "klpath/errors.hpp"
#include "klpath/io.hpp"
#include "klpath/parallel.hpp"
#include "klpath/report.hpp"
#include "klpath/verify.hpp"

using namespace klpath;

namespace {

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("float formatting round-trips") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(0.0) == "0");
  for (double x : {1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.34729635533386083}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("path CSV") {
  const auto points = partial_sums(KloostermanParams(PrimePowerModulus(3, 2), 1, 1));
  std::ostringstream out;
  write_path_csv(out, points);
  const std::string s = out.str();
  CHECK(s.rfind("j,x,re,im\n", 0) == 0);
  CHECK(count_of(s, "\n") == 7);
  CHECK(s.find("\n6,8,0.34729635533386083,0\n") != std::string::npos);

  // Rows parse back to the vertices exactly, consecutive ones 1/3 apart.
  std::istringstream in(s);
  std::string line;
  std::getline(in, line);
  std::vector<Complex> back;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string j, x, re, im;
    std::getline(row, j, ',');
    std::getline(row, x, ',');
    std::getline(row, re, ',');
    std::getline(row, im, ',');
    back.emplace_back(std::stod(re), std::stod(im));
  }
  REQUIRE(back.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(back[i] == points[i].value);
  for (std::size_t i = 1; i < 6; ++i) CHECK(std::abs(back[i] - back[i - 1]) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("SVG polyline") {
  const auto vertices = path_polyline(KloostermanParams(PrimePowerModulus(67, 2), 1, 1));
  CHECK(vertices.size() == 4422);
  std::ostringstream a;
  write_path_svg(a, vertices);
  const std::string s = a.str();
  CHECK(count_of(s, "<polyline") == 1);
  CHECK(count_of(s, "viewBox=") == 1);
  CHECK(count_of(s, ",") == 4422);

  std::ostringstream b;
  write_path_svg(b, vertices);
  CHECK(b.str() == s);

  // Stroke is 0.5% of the diagonal of the box spanned by the vertices.
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& z : vertices) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
  }
  const double stroke = 0.005 * std::hypot(xmax - xmin, ymax - ymin);
  CHECK(s.find("stroke-width=\"" + format_double(stroke) + "\"") != std::string::npos);

  std::ostringstream rotated;
  write_path_svg(rotated, vertices, SvgOptions{.rotate = true});
  CHECK(rotated.str() != s);
  CHECK_THROWS_AS(write_path_svg(a, std::vector<Complex>{}), PreconditionViolated);
}

TEST_CASE("series and histogram CSV") {
  Eigen::MatrixXcd paths(2, 2);
  paths << Complex(0, 0), Complex(1, -1), Complex(0, 0), Complex(0.5, 0.25);
  const std::vector<double> grid = {0.0, 1.0};
  std::ostringstream out;
  write_series_csv(out, grid, paths, 8, 7);
  CHECK(out.str() == "# seed=7 H=8 N=2 grid=2\nsample,t,re,im\n0,0,0,0\n0,1,1,-1\n1,0,0,0\n1,1,0.5,0.25\n");
  CHECK_THROWS_AS(write_series_csv(out, std::vector<double>{0.0}, paths, 8, 7), PreconditionViolated);

  std::ostringstream hist;
  write_histogram_csv(hist, std::vector<double>{-2.0, -1.0, 0.0, 0.0, 2.0, 5.0}, -2.0, 2.0, 2);
  CHECK(hist.str() == "value,count\n-1,2\n1,3\n");
}

TEST_CASE("block reductions are deterministic") {
  // Summands of wildly different magnitude make the order visible.
  std::vector<double> xs(100'003);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i % 7 == 0 ? 1e16 : 1.0) * (i % 2 ? -1.0 : 1.0) + 0.1 * i;
  auto run = [&](unsigned threads) {
    return block_reduce(
        xs.size(), 1000,
        [&](std::uint64_t b, std::uint64_t e) {
          double s = 0.0;
          for (auto i = b; i < e; ++i) s += xs[i];
          return s;
        },
        [](double a, double c) { return a + c; }, 0.0, threads);
  };
  const double one = run(1);
  for (unsigned t : {2U, 3U, 4U, 8U}) CHECK(run(t) == one);
  CHECK(block_reduce(0, 10, [](std::uint64_t, std::uint64_t) { return 1; }, [](int a, int b) { return a + b; }, 42) == 42);

  std::vector<int> hit(1000, 0);
  for_each_block(1000, 7, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
    for (auto i = b; i < e; ++i) hit[i]++;
  }, 4);
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));

  CHECK_THROWS_AS(for_each_block(100, 1, [](std::uint64_t b, std::uint64_t, std::uint64_t) {
    if (b == 57) throw DomainError("boom");
  }, 4), DomainError);
}

TEST_CASE("compensated sums") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 10; ++i) s.add(1e-16);
  CHECK(s.value() == doctest::Approx(1.0 + 1e-15).epsilon(1e-17));
  CompensatedSum big;
  big.add(1e100);
  big.add(1.0);
  big.add(-1e100);
  CHECK(big.value() == 1.0);
}

TEST_CASE("reports serialise and replay") {
  ExperimentReport r;
  r.name = "x";
  r.params = {{"seed", 3}};
  r.observed = {{"v", 0.1}};
  r.pass = true;
  r.tolerance = 0.5;
  const nlohmann::json j = r;
  const auto back = j.get<ExperimentReport>();
  CHECK(back.name == "x");
  CHECK(back.params == r.params);
  CHECK(back.observed == r.observed);
  CHECK(back.pass);
  CHECK(back.tolerance == 0.5);
  for (const char* key : {"name", "params", "observed", "reference", "provenance", "tolerance", "pass", "seconds"}) {
    CHECK(j.contains(key));
  }
  CHECK_THROWS_AS(run_suite("nope"), PreconditionViolated);
  CHECK(all_pass(run_suite("hensel")));
}
