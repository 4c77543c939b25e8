#include "mppic/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mppic/error.hpp"

namespace mppic {

std::size_t probe_cell(const GridSpec& grid, const Vec3& point) {
  if (!inside_interior(point, grid)) throw GeometryError("probe point outside the domain");
  Index3 c{};
  for (int a = 0; a < 3; ++a) {
    const int i = static_cast<int>(std::floor((point[a] - grid.origin[a]) / grid.h[a])) + 1;
    c[a] = std::clamp(i, 1, grid.n[a]);
  }
  return grid.index(c);
}

ProbeRecorder::ProbeRecorder(const GridSpec& grid, std::span<const Vec3> points, double interval,
                             double t0)
    : interval_(interval), t0_(t0) {
  if (!(interval > 0.0)) throw ConfigError("probe interval must be positive");
  for (const Vec3& p : points) {
    ProbeSeries s;
    s.point = p;
    s.cell = probe_cell(grid, p);
    series_.push_back(std::move(s));
  }
}

void ProbeRecorder::emit(std::span<const double> eps_g, double t) {
  for (ProbeSeries& s : series_) {
    s.times.push_back(t);
    s.values.push_back(eps_g[s.cell]);
  }
  ++next_;
}

void ProbeRecorder::observe(std::span<const double> eps_g, double t_next) {
  for (;;) {
    const double t = t0_ + static_cast<double>(next_) * interval_;
    if (!(t < t_next)) break;
    emit(eps_g, t);
  }
}

void ProbeRecorder::finish(std::span<const double> eps_g, double t_end) {
  observe(eps_g, t_end);
  const double t = t0_ + static_cast<double>(next_) * interval_;
  if (t <= t_end) emit(eps_g, t);
}

void write_probe_csv(const ProbeSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "time,value\n";
  for (std::size_t i = 0; i < series.times.size(); ++i)
    out << fmt::format("{:.17g},{:.17g}\n", series.times[i], series.values[i]);
}

ProbeSeries read_probe_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  ProbeSeries s;
  std::string line;
  std::getline(in, line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
      throw ConfigError("expected two columns", lineno);
    try {
      s.times.push_back(std::stod(a));
      s.values.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw ConfigError("not a number", lineno);
    }
  }
  return s;
}

}  // namespace mppic
