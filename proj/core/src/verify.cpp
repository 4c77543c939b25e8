#include "mppic/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "mppic/error.hpp"

static_assert(std::endian::native == std::endian::little, "dump I/O assumes a little-endian host");

namespace mppic {

namespace {

constexpr char kMagic[4] = {'M', 'P', 'X', 'D'};

template <class T>
void put(std::vector<char>& buf, T value) {
  const std::size_t at = buf.size();
  buf.resize(at + sizeof(T));
  std::memcpy(buf.data() + at, &value, sizeof(T));
}

template <class T>
T take(const std::vector<char>& buf, std::size_t at) {
  T value;
  std::memcpy(&value, buf.data() + at, sizeof(T));
  return value;
}

std::vector<std::vector<double>*> mutable_variables(SimState& s) {
  FieldState& f = s.fields;
  ParcelSet& p = s.parcels;
  return {&f.eps_g, &f.p, &f.u, &f.v, &f.w, &f.eps_p, &f.f_x, &f.f_y, &f.f_z,
          &p.x, &p.y, &p.z, &p.u, &p.v, &p.w, &p.d, &p.rho, &p.omega};
}

}  // namespace

const std::array<const char*, 18>& dump_variable_names() {
  static const std::array<const char*, 18> names{
      "eps_g", "p", "u", "v", "w", "eps_p", "f_x", "f_y", "f_z",
      "parcel_x", "parcel_y", "parcel_z", "parcel_u", "parcel_v", "parcel_w",
      "parcel_d", "parcel_rho", "parcel_omega"};
  return names;
}

std::vector<const std::vector<double>*> dump_variables(const SimState& state) {
  auto vars = mutable_variables(const_cast<SimState&>(state));
  return {vars.begin(), vars.end()};
}

void dump_state(const SimState& state, const GridSpec& grid, double dt,
                const std::filesystem::path& path) {
  const std::size_t cells = grid.stored_count();
  const std::size_t np = state.parcels.size();
  const auto vars = dump_variables(state);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const std::size_t want = v < 9 ? cells : np;
    if (vars[v]->size() != want)
      throw DumpError(std::string("array ") + dump_variable_names()[v] + " has the wrong length");
  }

  std::vector<char> buf;
  buf.reserve(kDumpHeaderBytes + 8 * (9 * cells + 9 * np));
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(buf, kDumpVersion);
  for (int a = 0; a < 3; ++a) put<std::uint32_t>(buf, static_cast<std::uint32_t>(grid.n[a]));
  put<std::uint32_t>(buf, 0);
  put<std::uint64_t>(buf, np);
  put<double>(buf, state.time);
  put<double>(buf, dt);
  for (const auto* v : vars) {
    const std::size_t at = buf.size();
    buf.resize(at + v->size() * sizeof(double));
    if (!v->empty()) std::memcpy(buf.data() + at, v->data(), v->size() * sizeof(double));
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DumpError("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DumpError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DumpError("cannot move dump into place: " + ec.message());
}

LoadedDump load_state(const std::filesystem::path& path, const GridSpec* expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DumpError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kDumpHeaderBytes) throw DumpError("corrupt header: file too short");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw DumpError("corrupt header: bad magic");

  LoadedDump out;
  DumpHeader& h = out.header;
  h.version = take<std::uint32_t>(buf, 4);
  if (h.version != kDumpVersion) throw DumpError("unsupported dump version " + std::to_string(h.version));
  for (int a = 0; a < 3; ++a) {
    const auto n = take<std::uint32_t>(buf, 8 + 4 * a);
    if (n < 2 || n > (1u << 20)) throw DumpError("corrupt header: bad grid size");
    h.cells[a] = static_cast<int>(n);
  }
  h.parcels = take<std::uint64_t>(buf, 24);
  h.time = take<double>(buf, 32);
  h.dt = take<double>(buf, 40);

  if (expect && expect->n != h.cells) throw DumpError("dump grid does not match the case grid");

  const std::uint64_t cells = static_cast<std::uint64_t>(h.cells[0] + 2) * (h.cells[1] + 2) * (h.cells[2] + 2);
  const std::uint64_t doubles = 9 * cells + 9 * h.parcels;
  if (h.parcels > buf.size() || buf.size() != kDumpHeaderBytes + 8 * doubles)
    throw DumpError("corrupt header: payload length does not match the header");

  std::size_t at = kDumpHeaderBytes;
  auto vars = mutable_variables(out.state);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const std::size_t len = v < 9 ? cells : h.parcels;
    vars[v]->resize(len);
    if (len) std::memcpy(vars[v]->data(), buf.data() + at, len * sizeof(double));
    at += len * sizeof(double);
  }
  out.state.time = h.time;
  return out;
}

double digits_matching(double a, double b) {
  if (a == b) return kDigitsMax;
  const double rel = std::abs(a - b) / std::abs(a);
  const double d = -std::log10(rel);
  if (std::isnan(d)) return kDigitsMin;
  return std::clamp(d, static_cast<double>(kDigitsMin), static_cast<double>(kDigitsMax));
}

int digits_bin(double digits) {
  const int b = static_cast<int>(std::lround(digits));
  return std::clamp(b, kDigitsMin, kDigitsMax);
}

std::uint64_t DigitsHistogram::compared() const {
  std::uint64_t s = 0;
  for (const auto c : counts) s += c;
  return s;
}

std::vector<int> DigitsHistogram::occupied() const {
  std::vector<int> out;
  for (int d = kDigitsMin; d <= kDigitsMax; ++d)
    if (bin(d) > 0) out.push_back(d);
  return out;
}

Comparison compare_states(const SimState& ref, const SimState& other) {
  const auto va = dump_variables(ref);
  const auto vb = dump_variables(other);
  Comparison cmp;
  std::vector<double> all;
  std::array<std::uint64_t, kDigitsMax - kDigitsMin + 1> total{};
  for (std::size_t v = 0; v < va.size(); ++v) {
    if (va[v]->size() != vb[v]->size())
      throw DumpError(std::string("shape mismatch in ") + dump_variable_names()[v]);
    DigitsHistogram h;
    h.variable = dump_variable_names()[v];
    for (std::size_t i = 0; i < va[v]->size(); ++i) {
      const double a = (*va[v])[i];
      if (a == 0.0) {
        ++h.zero_reference;
        continue;
      }
      const double d = digits_matching(a, (*vb[v])[i]);
      ++h.bin(digits_bin(d));
      all.push_back(d);
    }
    for (std::size_t b = 0; b < total.size(); ++b) total[b] += h.counts[b];
    cmp.histograms.push_back(std::move(h));
  }
  DigitsSummary& s = cmp.summary;
  s.compared = all.size();
  if (!all.empty()) {
    s.min = *std::min_element(all.begin(), all.end());
    const std::size_t mid = all.size() / 2;
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mid), all.end());
    s.median = all[mid];
    std::size_t best = 0;
    for (std::size_t b = 1; b < total.size(); ++b)
      if (total[b] > total[best]) best = b;
    s.mode = static_cast<int>(best) + kDigitsMin;
  }
  return cmp;
}

Comparison compare_dumps(const std::filesystem::path& reference, const std::filesystem::path& other) {
  const LoadedDump a = load_state(reference);
  const LoadedDump b = load_state(other);
  if (a.header.cells != b.header.cells || a.header.parcels != b.header.parcels)
    throw DumpError("dumps differ in grid size or parcel count");
  return compare_states(a.state, b.state);
}

void write_histogram_csv(const Comparison& cmp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "variable,digits_bin,count\n";
  for (const DigitsHistogram& h : cmp.histograms) {
    for (int d = kDigitsMin; d <= kDigitsMax; ++d) {
      if (h.bin(d) > 0) out << fmt::format("{},{},{}\n", h.variable, d, h.bin(d));
    }
  }
}

}  // namespace mppic
