#include "klpath/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "klpath/errors.hpp"

namespace klpath {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_path_csv(std::ostream& out, std::span<const PathPoint> points) {
  out << "j,x,re,im\n";
  for (const auto& pt : points) {
    out << pt.j << ',' << pt.x << ',' << format_double(pt.value.real()) << ',' << format_double(pt.value.imag())
        << '\n';
  }
}

void write_path_svg(std::ostream& out, std::span<const Complex> vertices, const SvgOptions& options) {
  if (vertices.empty()) throw PreconditionViolated("cannot draw an empty path");
  std::vector<Complex> pts(vertices.begin(), vertices.end());
  if (options.rotate) {
    for (auto& z : pts) z *= Complex(0.0, 1.0);
  }
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  for (const auto& z : pts) {
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, -z.imag());
    ymax = std::max(ymax, -z.imag());
  }
  double diagonal = std::hypot(xmax - xmin, ymax - ymin);
  if (diagonal == 0.0) diagonal = 1.0;
  const double stroke = 0.005 * diagonal;
  const double margin = 0.02 * diagonal;
  const double vw = xmax - xmin + 2 * margin;
  const double vh = ymax - ymin + 2 * margin;
  const double height = options.width * vh / vw;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(options.width) << "\" height=\""
      << format_double(height) << "\" viewBox=\"" << format_double(xmin - margin) << ' '
      << format_double(ymin - margin) << ' ' << format_double(vw) << ' ' << format_double(vh) << "\">\n";
  out << "<polyline fill=\"none\" stroke=\"" << options.stroke << "\" stroke-width=\"" << format_double(stroke)
      << "\" stroke-linejoin=\"round\" points=\"";
  bool first = true;
  for (const auto& z : pts) {
    if (!first) out << ' ';
    first = false;
    out << format_double(z.real()) << ',' << format_double(-z.imag());
  }
  out << "\"/>\n</svg>\n";
}

void write_series_csv(std::ostream& out, std::span<const double> grid, const Eigen::MatrixXcd& paths, int truncation,
                      std::uint64_t seed) {
  if (static_cast<std::size_t>(paths.cols()) != grid.size()) {
    throw PreconditionViolated("sample matrix does not match the grid");
  }
  out << "# seed=" << seed << " H=" << truncation << " N=" << paths.rows() << " grid=" << grid.size() << '\n';
  out << "sample,t,re,im\n";
  for (Eigen::Index i = 0; i < paths.rows(); ++i) {
    for (Eigen::Index g = 0; g < paths.cols(); ++g) {
      const Complex z = paths(i, g);
      out << i << ',' << format_double(grid[static_cast<std::size_t>(g)]) << ',' << format_double(z.real()) << ','
          << format_double(z.imag()) << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& out, std::span<const double> values, double lo, double hi, unsigned bins) {
  if (bins == 0 || !(hi > lo)) throw PreconditionViolated("histogram needs bins >= 1 and hi > lo");
  std::vector<std::uint64_t> counts(bins, 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto k = static_cast<std::size_t>((v - lo) / width);
    counts[std::min<std::size_t>(k, bins - 1)]++;
  }
  out << "value,count\n";
  for (unsigned k = 0; k < bins; ++k) out << format_double(lo + (k + 0.5) * width) << ',' << counts[k] << '\n';
}

}  // namespace klpath
