#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mppic/grid.hpp"
#include "mppic/scheduler.hpp"

namespace mppic {

inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderBytes = 48;

/// Binary state dump ("MPXD"), little-endian:
///   0  char[4] magic      4  u32 version    8  u32 nx   12  u32 ny   16  u32 nz
///   20 u32 reserved (0)   24 u64 parcels    32 f64 time 40  f64 dt
/// followed by binary64 arrays over all stored cells (eps_g, p, u, v, w, eps_p, f_x, f_y,
/// f_z) and per parcel (x, y, z, u, v, w, d, rho, omega).
struct DumpHeader {
  std::uint32_t version = kDumpVersion;
  Index3 cells{};
  std::uint64_t parcels = 0;
  double time = 0.0;
  double dt = 0.0;
};

struct LoadedDump {
  DumpHeader header;
  SimState state;
};

/// Writes `state` atomically (temporary file, then rename). Throws DumpError.
void dump_state(const SimState& state, const GridSpec& grid, double dt,
                const std::filesystem::path& path);

/// Throws DumpError for I/O failures, bad magic/version, or a payload length that does not
/// match the header. With `expect`, also for a grid mismatch.
LoadedDump load_state(const std::filesystem::path& path, const GridSpec* expect = nullptr);

/// Names of the dumped variables in payload order.
const std::array<const char*, 18>& dump_variable_names();

/// Views of the dumped arrays in payload order.
std::vector<const std::vector<double>*> dump_variables(const SimState& state);

inline constexpr int kDigitsMin = -5;
inline constexpr int kDigitsMax = 16;

/// -log10(|a - b| / |a|) clamped to [-5, 16]; 16 for exact matches. `a` must be non-zero.
double digits_matching(double a, double b);

/// Integer-binned digits histogram of one variable.
struct DigitsHistogram {
  std::string variable;
  std::array<std::uint64_t, kDigitsMax - kDigitsMin + 1> counts{};
  std::uint64_t zero_reference = 0;  ///< entries skipped because the reference is 0

  std::uint64_t& bin(int digits) { return counts[static_cast<std::size_t>(digits - kDigitsMin)]; }
  std::uint64_t bin(int digits) const { return counts[static_cast<std::size_t>(digits - kDigitsMin)]; }
  std::uint64_t compared() const;
  /// Bins with a non-zero count.
  std::vector<int> occupied() const;
};

struct DigitsSummary {
  double min = 0.0;
  double median = 0.0;
  int mode = 0;
  std::uint64_t compared = 0;
};

struct Comparison {
  std::vector<DigitsHistogram> histograms;
  DigitsSummary summary;
};

/// Rounds to the nearest integer bin.
int digits_bin(double digits);

/// Element-wise digits over two states with identical shapes. Throws DumpError on a shape
/// mismatch.
Comparison compare_states(const SimState& reference, const SimState& other);

/// Loads both dumps and compares them. Throws DumpError on format or shape mismatch.
Comparison compare_dumps(const std::filesystem::path& reference, const std::filesystem::path& other);

/// CSV with columns variable,digits_bin,count (non-empty bins only).
void write_histogram_csv(const Comparison& cmp, const std::filesystem::path& path);

}  // namespace mppic
