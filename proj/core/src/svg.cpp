#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "vstates/errors.hpp"
#include "vstates/field.hpp"
#include "vstates/io.hpp"

namespace vstates::io {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCanvas = 800;

struct Mapper {
  double scale;
  double to_x(double x) const { return kCanvas / 2.0 + scale * x; }
  double to_y(double y) const { return kCanvas / 2.0 - scale * y; }
};

void append_fmt(std::string& out, const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  out += buf;
}

// Path data ("M x y L x y ...") through world-coordinate points.
std::string path_data(const std::vector<std::pair<double, double>>& pts,
                      const Mapper& map, bool close) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    append_fmt(d, "%c%.2f %.2f", i == 0 ? 'M' : 'L', map.to_x(pts[i].first),
               map.to_y(pts[i].second));
  }
  if (close && !pts.empty()) d += 'Z';
  return d;
}

}  // namespace

std::string render_svg(const GridTrace& trace, double omega) {
  const int m = trace.m;

  double max_rho = 0.0;
  for (const auto& z : trace.phi) max_rho = std::max(max_rho, std::abs(z));
  double extent = 1.15 * max_rho;
  if (omega > 0.0) {
    extent = std::max(extent, 1.45 / std::sqrt(2.0 * omega));
  }
  const Mapper map{(kCanvas / 2.0 - 20.0) / extent};

  std::string svg;
  append_fmt(svg,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
             "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
             kCanvas, kCanvas, kCanvas, kCanvas);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes through the origin.
  append_fmt(svg,
             "<line x1=\"0\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
             "stroke=\"#dddddd\"/>\n",
             kCanvas / 2.0, kCanvas, kCanvas / 2.0);
  append_fmt(svg,
             "<line x1=\"%.1f\" y1=\"0\" x2=\"%.1f\" y2=\"%d\" "
             "stroke=\"#dddddd\"/>\n",
             kCanvas / 2.0, kCanvas / 2.0, kCanvas);

  // Patch boundary.
  {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(trace.phi.size());
    for (const auto& z : trace.phi) pts.emplace_back(z.real(), z.imag());
    append_fmt(svg,
               "<path d=\"%s\" fill=\"#dce9f7\" stroke=\"#1f77b4\" "
               "stroke-width=\"2\"/>\n",
               path_data(pts, map, true).c_str());
  }

  // Level curves, corotation curve and critical points are decorations; if
  // the field evaluation objects to this trace (e.g. omega outside the
  // bracketing regime), the plot still shows the boundary.
  try {
    const std::vector<CriticalPoint> cps = find_critical_points(trace, omega);
    const CriticalPoint* saddle = nullptr;
    const CriticalPoint* center = nullptr;
    for (const auto& cp : cps) {
      if (std::abs(cp.theta) < 1e-8) saddle = &cp;
      else center = &cp;
    }

    // A few stream-function levels: the separatrix level and levels between
    // it and the center value pick out the cat's-eye structure.
    std::vector<double> levels;
    if (saddle) levels.push_back(saddle->psi_value);
    if (saddle && center &&
        std::abs(center->psi_value - saddle->psi_value) > 1e-12) {
      levels.push_back(0.5 * (saddle->psi_value + center->psi_value));
      levels.push_back(0.1 * saddle->psi_value +
                       0.9 * center->psi_value);
    }
    if (saddle) levels.push_back(0.5 * saddle->psi_value);

    const FieldGrid grid =
        sample_field(trace, omega, 72, 72, std::max(2.0 * max_rho, extent));
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const bool separatrix = li == 0;
      for (const ContourLine& line : contour_extract(grid, levels[li])) {
        // Replicate the sector contour over the symmetry group: m rotations
        // times the reflection through theta = 0.
        for (int k = 0; k < m; ++k) {
          for (int sign = -1; sign <= 1; sign += 2) {
            std::vector<std::pair<double, double>> pts;
            pts.reserve(line.points.size());
            for (const auto& [r, th] : line.points) {
              const double a = sign * th + 2.0 * kPi * k / m;
              pts.emplace_back(r * std::cos(a), r * std::sin(a));
            }
            append_fmt(svg,
                       "<path d=\"%s\" fill=\"none\" stroke=\"%s\" "
                       "stroke-width=\"1\"/>\n",
                       path_data(pts, map, line.closed).c_str(),
                       separatrix ? "#d62728" : "#999999");
          }
        }
      }
    }

    // Corotation curve r_c(theta), dashed.
    {
      const int n = 360;
      std::vector<double> thetas(n);
      for (int i = 0; i < n; ++i) thetas[i] = 2.0 * kPi * i / n;
      const std::vector<double> rc = rc_curve(trace, omega, thetas);
      std::vector<std::pair<double, double>> pts;
      pts.reserve(n);
      for (int i = 0; i < n; ++i) {
        pts.emplace_back(rc[i] * std::cos(thetas[i]),
                         rc[i] * std::sin(thetas[i]));
      }
      append_fmt(svg,
                 "<path d=\"%s\" fill=\"none\" stroke=\"#2ca02c\" "
                 "stroke-width=\"1.5\" stroke-dasharray=\"8 5\"/>\n",
                 path_data(pts, map, true).c_str());
    }

    // Critical-point markers, replicated over the symmetry rotations.
    for (const auto& cp : cps) {
      for (int k = 0; k < m; ++k) {
        const double a = cp.theta + 2.0 * kPi * k / m;
        const double x = map.to_x(cp.r * std::cos(a));
        const double y = map.to_y(cp.r * std::sin(a));
        if (cp.kind == CriticalKind::Center) {
          append_fmt(svg,
                     "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" "
                     "fill=\"#2ca02c\"/>\n",
                     x, y);
        } else {
          const char* color =
              cp.kind == CriticalKind::Saddle ? "#d62728" : "#7f7f7f";
          append_fmt(svg,
                     "<path d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\" "
                     "stroke=\"%s\" stroke-width=\"2.5\"/>\n",
                     x - 6, y - 6, x + 6, y + 6, x - 6, y + 6, x + 6, y - 6,
                     color);
        }
      }
    }
  } catch (const NumericalError&) {
    // boundary-only plot
  }

  append_fmt(svg,
             "<text x=\"12\" y=\"24\" font-family=\"sans-serif\" "
             "font-size=\"16\" fill=\"#333333\">m = %d, omega = %.12g</text>\n",
             m, omega);
  svg += "</svg>\n";
  return svg;
}

}  // namespace vstates::io
