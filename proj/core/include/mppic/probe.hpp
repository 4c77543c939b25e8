#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mppic/fields.hpp"
#include "mppic/grid.hpp"

namespace mppic {

/// Samples of one cell-centered quantity at a fixed point.
struct ProbeSeries {
  Vec3 point{};
  std::size_t cell = 0;
  std::vector<double> times;
  std::vector<double> values;
};

/// Samples eps_g at fixed points on a uniform time grid t0, t0 + dt_s, ... Each sample takes
/// the value of the latest state at or before the sample time (zero-order hold).
class ProbeRecorder {
 public:
  /// Throws GeometryError for points outside the interior.
  ProbeRecorder(const GridSpec& grid, std::span<const Vec3> points, double interval, double t0 = 0.0);

  /// Emits every sample time strictly before `t_next` from `eps_g`, the field valid since the
  /// last observed time.
  void observe(std::span<const double> eps_g, double t_next);
  /// As observe, plus a sample at `t` itself when it falls on the sampling grid.
  void finish(std::span<const double> eps_g, double t);

  const std::vector<ProbeSeries>& series() const { return series_; }

 private:
  void emit(std::span<const double> eps_g, double t);

  std::vector<ProbeSeries> series_;
  double interval_;
  double t0_;
  std::size_t next_ = 0;
};

/// Nearest cell center to `point` (the containing cell).
std::size_t probe_cell(const GridSpec& grid, const Vec3& point);

/// CSV with header "time,value".
void write_probe_csv(const ProbeSeries& series, const std::filesystem::path& path);
/// Reads the first two columns of a CSV with a header line.
ProbeSeries read_probe_csv(const std::filesystem::path& path);

}  // namespace mppic
