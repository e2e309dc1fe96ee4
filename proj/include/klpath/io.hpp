#pragma once

// Text output: path CSV, SVG polylines, series CSV and histograms. Floats are
// written with 17 significant digits so doubles round-trip.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "klpath/kloosterman.hpp"

namespace klpath {

std::string format_double(double x);

// Header `j,x,re,im`, one row per vertex.
void write_path_csv(std::ostream& out, std::span<const PathPoint> points);

struct SvgOptions {
  bool rotate = false;  // quarter turn counterclockwise, (x, y) -> (-y, x)
  double width = 800.0;
  std::string stroke = "black";
};

// A single polyline with a viewBox fitted to the vertices (plus a small margin)
// and stroke width 0.5% of the bounding-box diagonal. The y axis points up.
void write_path_svg(std::ostream& out, std::span<const Complex> vertices, const SvgOptions& options = {});

// `# seed=... H=... N=... grid=...` followed by `sample,t,re,im`.
void write_series_csv(std::ostream& out, std::span<const double> grid, const Eigen::MatrixXcd& paths, int truncation,
                      std::uint64_t seed);

// `value,count` with one row per bin centre over [lo, hi).
void write_histogram_csv(std::ostream& out, std::span<const double> values, double lo, double hi, unsigned bins);

}  // namespace klpath
