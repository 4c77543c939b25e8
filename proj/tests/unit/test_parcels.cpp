#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "mppic/error.hpp"
#include "mppic/parcels.hpp"

using namespace mppic;
using mppic::test::box_mesh;
using mppic::test::column_mesh;
using mppic::test::rel_err;

namespace {

double total_volume(const ParcelSet& ps) {
  double v = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) v += ps.volume(i);
  return v;
}

double deposited_volume(const Field& eps_p, const GridSpec& g) {
  double v = 0.0;
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) v += eps_p[g.index(i, j, k)] * g.cell_volume();
  return v;
}

ParcelSet single(const Vec3& pos, const Vec3& vel = {}, double d = 1e-3, double omega = 1.0) {
  ParcelSet ps;
  ps.push_back(pos, vel, d, 2000.0, omega);
  return ps;
}

}  // namespace

TEST(Parcels, VerificationBedCount) {
  const Box bed{{0.0, 0.0, 0.0}, {0.12, 0.12, 0.12}};
  // floor(0.58 * 1.728e-3 / (10 * pi/6 * (400e-6)^3)) = floor(2990839.69)
  const double particle = kPi / 6.0 * 400e-6 * 400e-6 * 400e-6;
  EXPECT_NEAR(particle, 3.35103e-11, 1e-16);
  EXPECT_EQ(bed_parcel_count(bed, 0.58, 400e-6, 10.0), 2990839u);
  // reference count for this bed: 2,983,447
  EXPECT_LT(rel_err(2990839.0, 2983447.0), 3e-3);
}

TEST(Parcels, CountInvariantUnderJointScaling) {
  const Box bed{{0.0, 0.0, 0.0}, {0.05, 0.05, 0.05}};
  EXPECT_EQ(bed_parcel_count(bed, 0.2, 200e-6, 40.0), bed_parcel_count(bed, 0.4, 200e-6, 80.0));
}

TEST(Parcels, SeededPopulationIsReproducible) {
  const Box bed{{0.0, 0.0, 0.0}, {0.06, 0.06, 0.03}};
  const ParcelSet a = populate_bed(bed, 0.5, 300e-6, 2000.0, 500.0, 7);
  const ParcelSet b = populate_bed(bed, 0.5, 300e-6, 2000.0, 500.0, 7);
  const ParcelSet c = populate_bed(bed, 0.5, 300e-6, 2000.0, 500.0, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.size(), bed_parcel_count(bed, 0.5, 300e-6, 500.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int ax = 0; ax < 3; ++ax) {
      EXPECT_GE(a.position(i)[ax], bed.lo[ax]);
      EXPECT_LE(a.position(i)[ax], bed.hi[ax]);
    }
    EXPECT_EQ(a.velocity(i), (Vec3{0.0, 0.0, 0.0}));
  }
}

TEST(Parcels, EmptyOrDegenerateBedRejected) {
  EXPECT_THROW(populate_bed({{0, 0, 0}, {0.1, 0.1, 0.0}}, 0.5, 1e-3, 2000, 1, 1), GeometryError);
  EXPECT_THROW(populate_bed({{0, 0, 0}, {1e-4, 1e-4, 1e-4}}, 0.5, 1e-3, 2000, 1, 1), ConfigError);
}

TEST(Parcels, ParcelVolumeIsWeightTimesParticle) {
  const ParcelSet ps = single({0.5, 0.5, 0.5}, {}, 2e-3, 12.0);
  EXPECT_DOUBLE_EQ(ps.volume(0), 12.0 * kPi / 6.0 * 8e-9);
}

TEST(Parcels, DepositAtCellCenter) {
  const Mesh m = box_mesh({4, 4, 4});
  const GridSpec& g = m.grid;
  const ParcelSet ps = single(g.cell_center({2, 3, 2}), {}, 0.1);
  const Deposition d = deposit(ps, m);
  const std::size_t c = g.index(2, 3, 2);
  EXPECT_DOUBLE_EQ(d.eps_p[c], ps.volume(0) / g.cell_volume());
  for (std::size_t i = 0; i < d.eps_p.size(); ++i)
    if (i != c) {
      EXPECT_EQ(d.eps_p[i], 0.0);
    }
  EXPECT_EQ(d.cell_offsets[c + 1] - d.cell_offsets[c], 1u);
}

TEST(Parcels, DepositSymmetricPair) {
  const Mesh m = box_mesh({4, 4, 4});
  const GridSpec& g = m.grid;
  ParcelSet ps = single(g.cell_center({2, 2, 2}), {}, 0.1);
  ps.push_back(g.cell_center({3, 2, 2}), {}, 0.1, 2000.0, 1.0);
  const Deposition d = deposit(ps, m);
  EXPECT_EQ(d.eps_p[g.index(2, 2, 2)], d.eps_p[g.index(3, 2, 2)]);
}

TEST(Parcels, WallFoldingConservesVolume) {
  const Mesh m = box_mesh({3, 3, 3});
  const ParcelSet ps = single({0.01, 0.02, 0.99}, {}, 0.05);
  const Deposition d = deposit(ps, m);
  EXPECT_LE(rel_err(deposited_volume(d.eps_p, m.grid), total_volume(ps)), 1e-14);
}

TEST(ParcelsProperty, DepositionConservesVolume) {
  const Mesh m = box_mesh({9, 7, 11}, {0.09, 0.07, 0.22});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 0.09), uy(0.0, 0.07), uz(0.0, 0.22), ud(100e-6, 500e-6);
  ParcelSet ps;
  for (int i = 0; i < 20000; ++i) ps.push_back({ux(rng), uy(rng), uz(rng)}, {}, ud(rng), 2000.0, 5.0);
  const Deposition d = deposit(ps, m);
  EXPECT_LE(rel_err(deposited_volume(d.eps_p, m.grid), total_volume(ps)), 1e-12);
  EXPECT_EQ(d.cell_parcels.size(), ps.size());
}

TEST(Parcels, VolumeFractionsClipAndSumToOne) {
  const Mesh m = box_mesh({3, 3, 3});
  FieldState s(m.grid);
  Field eps_p(m.grid.stored_count(), 0.3);
  eps_p[m.grid.index(2, 2, 2)] = 1.4;
  set_volume_fractions(s, eps_p, m);
  EXPECT_EQ(s.eps_p[m.grid.index(2, 2, 2)], kMaxSolidsFraction);
  for (int k = 1; k <= 3; ++k)
    for (int j = 1; j <= 3; ++j)
      for (int i = 1; i <= 3; ++i) {
        const std::size_t c = m.grid.index(i, j, k);
        EXPECT_LE(std::abs(s.eps_g[c] + s.eps_p[c] - 1.0), 1e-14);
      }
}

TEST(Parcels, SniderStressValues) {
  const StressParams p;
  EXPECT_EQ(snider_stress(0.0, p), 0.0);
  EXPECT_LE(rel_err(snider_stress(0.5, p), 125.0), 1e-12);
  EXPECT_LE(rel_err(snider_stress(0.6, p), 5.4e8), 1e-12);
}

TEST(ParcelsProperty, SniderStressMonotone) {
  const StressParams p;
  double prev = 0.0;
  for (int i = 0; i <= 5999; ++i) {
    const double tau = snider_stress(i * 1e-4, p);
    EXPECT_GE(tau, prev);
    prev = tau;
  }
}

TEST(Parcels, StressGradientCases) {
  const GridSpec g = box_mesh({4, 4, 4}, {0.04, 0.04, 0.04}).grid;
  Field uniform(g.stored_count(), 125.0);
  for (const Field& f : stress_gradient(uniform, g))
    for (double x : f) EXPECT_EQ(x, 0.0);

  Field linear(g.stored_count());
  for (std::size_t i = 0; i < linear.size(); ++i) linear[i] = 3.0 + 250.0 * g.cell_center(g.coords(i))[0];
  const auto gl = stress_gradient(linear, g);
  EXPECT_NEAR(gl[0][g.index(2, 2, 2)], 250.0, 1e-9);
  EXPECT_NEAR(gl[0][g.index(0, 1, 1)], 250.0, 1e-9);

  Field step(g.stored_count(), 0.0);
  for (std::size_t i = 0; i < step.size(); ++i)
    if (g.coords(i)[0] <= 2) step[i] = 125.0;
  const auto gs = stress_gradient(step, g);
  EXPECT_NEAR(gs[0][g.index(2, 2, 2)], -12500.0, 1e-9);
}

TEST(Parcels, SolidsStressGhostsCopyInterior) {
  const GridSpec g = box_mesh({3, 3, 3}).grid;
  Field eps(g.stored_count(), 0.0);
  eps[g.index(1, 2, 2)] = 0.5;
  const Field tau = solids_stress(eps, g, StressParams{});
  EXPECT_EQ(tau[g.index(0, 2, 2)], tau[g.index(1, 2, 2)]);
  EXPECT_LE(rel_err(tau[g.index(1, 2, 2)], 125.0), 1e-12);
}

TEST(Parcels, BallisticAdvance) {
  const Mesh m = box_mesh({4, 4, 4});
  ParcelSet ps = single({0.5, 0.5, 0.5}, {0.1, -0.2, 0.3});
  GasProps gas;
  gas.gravity = {0.0, 0.0, 0.0};
  std::vector<ParcelForcing> f(1);
  const AdvanceReport r = advance_parcels(ps, 0.01, f, gas, m, WallModel{});
  EXPECT_EQ(ps.velocity(0), (Vec3{0.1, -0.2, 0.3}));
  EXPECT_DOUBLE_EQ(ps.x[0], 0.5 + 0.01 * 0.1);
  EXPECT_DOUBLE_EQ(ps.z[0], 0.5 + 0.01 * 0.3);
  EXPECT_TRUE(r.displacement_ok);
}

TEST(Parcels, SemiImplicitDragHalfway) {
  const Mesh m = box_mesh({4, 4, 4});
  ParcelSet ps = single({0.5, 0.5, 0.5});
  GasProps gas;
  gas.gravity = {0.0, 0.0, 0.0};
  std::vector<ParcelForcing> f(1);
  f[0].gas_velocity = {1.0, 0.0, 0.0};
  f[0].drag_rate = 100.0;
  advance_parcels(ps, 0.01, f, gas, m, WallModel{});
  EXPECT_DOUBLE_EQ(ps.u[0], 0.5);

  ParcelSet stiff = single({0.5, 0.5, 0.5});
  f[0].drag_rate = 1e15;
  advance_parcels(stiff, 0.01, f, gas, m, WallModel{});
  EXPECT_NEAR(stiff.u[0], 1.0, 1e-12);
}

TEST(Parcels, StressOnlyActsAboveSolidsFloor) {
  const Mesh m = box_mesh({4, 4, 4});
  GasProps gas;
  gas.gravity = {0.0, 0.0, 0.0};
  std::vector<ParcelForcing> f(1);
  f[0].grad_tau = {1000.0, 0.0, 0.0};
  f[0].eps_p = 0.0;
  ParcelSet a = single({0.5, 0.5, 0.5});
  advance_parcels(a, 1e-3, f, gas, m, WallModel{});
  EXPECT_EQ(a.u[0], 0.0);
  f[0].eps_p = 0.5;
  ParcelSet b = single({0.5, 0.5, 0.5});
  advance_parcels(b, 1e-3, f, gas, m, WallModel{});
  EXPECT_DOUBLE_EQ(b.u[0], -1e-3 * 1000.0 / (0.5 * 2000.0));
}

TEST(Parcels, NonFiniteForcingAborts) {
  const Mesh m = box_mesh({4, 4, 4});
  ParcelSet ps = single({0.5, 0.5, 0.5});
  std::vector<ParcelForcing> f(1);
  f[0].grad_p = {std::nan(""), 0.0, 0.0};
  EXPECT_THROW(advance_parcels(ps, 1e-3, f, GasProps{}, m, WallModel{}), SolverError);
}

TEST(Parcels, LargeDisplacementFlagged) {
  const Mesh m = box_mesh({10, 10, 10});
  ParcelSet ps = single({0.5, 0.5, 0.5}, {20.0, 0.0, 0.0});
  GasProps gas;
  gas.gravity = {0.0, 0.0, 0.0};
  std::vector<ParcelForcing> f(1);
  const AdvanceReport r = advance_parcels(ps, 0.01, f, gas, m, WallModel{});
  EXPECT_FALSE(r.displacement_ok);
}

TEST(Parcels, WallReflection) {
  const Mesh m = box_mesh({4, 4, 4});
  ParcelSet ps = single({-0.001, 0.5, 0.5}, {-1.0, 0.2, 0.0});
  const ReflectReport r = reflect_walls(ps, m, WallModel{0.85, 1.0});
  EXPECT_EQ(r.reflections, 1u);
  EXPECT_DOUBLE_EQ(ps.x[0], 0.001);
  EXPECT_DOUBLE_EQ(ps.u[0], 0.85);
  EXPECT_DOUBLE_EQ(ps.v[0], 0.2);
}

TEST(Parcels, ParcelOnWallPlaneIsLeftAlone) {
  const Mesh m = box_mesh({4, 4, 4});
  ParcelSet ps = single({0.0, 0.5, 0.5}, {1.0, 0.0, 0.0});
  const ParcelSet before = ps;
  const ReflectReport r = reflect_walls(ps, m, WallModel{});
  EXPECT_EQ(r.reflections, 0u);
  EXPECT_EQ(ps, before);
}

TEST(ParcelsProperty, ElasticReflectionKeepsSpeed) {
  const Mesh m = box_mesh({4, 4, 4});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> out(-0.05, 0.0), in(0.1, 0.9), vel(-3.0, 3.0);
  ParcelSet ps;
  for (int i = 0; i < 1000; ++i) ps.push_back({out(rng), in(rng), 1.0 - out(rng)}, {vel(rng), vel(rng), vel(rng)}, 1e-4, 2000, 1);
  std::vector<double> speed2;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 v = ps.velocity(i);
    speed2.push_back(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  reflect_walls(ps, m, WallModel{1.0, 1.0});
  ASSERT_EQ(ps.size(), speed2.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 v = ps.velocity(i);
    EXPECT_LE(rel_err(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], speed2[i]), 2e-15);
    EXPECT_TRUE(inside_interior(ps.position(i), m.grid));
  }
}

TEST(Parcels, OutletRemovesAndInletReflects) {
  const Mesh m = column_mesh({4, 4, 4}, {1.0, 1.0, 1.0});
  ParcelSet ps = single({0.5, 0.5, 1.01}, {0.0, 0.0, 1.0});
  ps.push_back({0.5, 0.5, -0.01}, {0.0, 0.0, -1.0}, 1e-3, 2000, 1);
  const ReflectReport r = reflect_walls(ps, m, WallModel{});
  EXPECT_EQ(r.removed_outlet, 1u);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_DOUBLE_EQ(ps.z[0], 0.01);
  EXPECT_DOUBLE_EQ(ps.w[0], 0.85);
}

TEST(Parcels, BlockedCellReflectsBack) {
  GridConfig c;
  c.extent = {1.0, 1.0, 1.0};
  c.cells = {4, 4, 4};
  c.regions = {{CellFlag::Blocked, {0.0, 0.0, 0.0}, {0.5, 1.0, 0.5}}};
  const Mesh m = build_grid(c);
  ParcelSet ps = single({0.4, 0.5, 0.6}, {0.0, 0.0, -1.0});
  std::vector<Vec3> prev{{0.4, 0.5, 0.6}};
  ps.z[0] = 0.45;
  const ReflectReport r = reflect_walls(ps, m, WallModel{1.0, 1.0}, prev);
  EXPECT_EQ(r.reflections, 1u);
  EXPECT_DOUBLE_EQ(ps.z[0], 0.55);
  EXPECT_DOUBLE_EQ(ps.w[0], 1.0);
}

TEST(ParcelsProperty, AdvanceIsDeterministic) {
  const Mesh m = box_mesh({6, 6, 6});
  const ParcelSet start = populate_bed({{0.1, 0.1, 0.1}, {0.9, 0.9, 0.5}}, 0.1, 5e-3, 2000.0, 1.0, 4);
  std::vector<ParcelForcing> f(start.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i].gas_velocity = {0.01 * static_cast<double>(i % 7), 0.0, 0.3};
    f[i].drag_rate = 10.0;
  }
  ParcelSet a = start, b = start;
  advance_parcels(a, 1e-3, f, GasProps{}, m, WallModel{});
  advance_parcels(b, 1e-3, f, GasProps{}, m, WallModel{});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), start.size());
}
