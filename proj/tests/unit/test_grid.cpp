#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "helpers.hpp"
#include "mppic/cases.hpp"
#include "mppic/error.hpp"
#include "mppic/grid.hpp"

using namespace mppic;
using mppic::test::box_mesh;

TEST(Grid, VerificationColumnStoredCellCount) {
  const Mesh m = build_grid(verification_bed_config().grid);
  EXPECT_EQ(m.grid.stored_count(), 137924u);
  EXPECT_EQ(m.grid.stored_count(), 29u * 164u * 29u);
  EXPECT_EQ(m.flags.count(CellFlag::Inlet), 27u * 27u);
  EXPECT_EQ(m.flags.count(CellFlag::Outlet), 27u * 27u);
}

TEST(Grid, DefaultBoxIsFluidInsideWallOutside) {
  const Mesh m = box_mesh({2, 2, 2});
  EXPECT_EQ(m.flags.count(CellFlag::Fluid), 8u);
  EXPECT_EQ(m.flags.count(CellFlag::Wall), 56u);
}

TEST(Grid, GhostCellsAreNeverFluid) {
  const Mesh m = build_grid(bfs_config().grid);
  const GridSpec& g = m.grid;
  for (std::size_t i = 0; i < g.stored_count(); ++i) {
    if (!g.is_interior(g.coords(i))) {
      EXPECT_NE(m.flags[i], CellFlag::Fluid);
    }
  }
}

TEST(Grid, BoundaryCellsTouchFluid) {
  const Mesh m = build_grid(bfs_config().grid);
  const GridSpec& g = m.grid;
  for (std::size_t i = 0; i < g.stored_count(); ++i) {
    if (m.flags[i] != CellFlag::Inlet && m.flags[i] != CellFlag::Outlet) continue;
    bool touches = false;
    for (int a = 0; a < 3; ++a) {
      const Index3 c = g.coords(i);
      if (c[a] > 0 && m.flags[i - g.stride(a)] == CellFlag::Fluid) touches = true;
      if (c[a] <= g.n[a] && m.flags[i + g.stride(a)] == CellFlag::Fluid) touches = true;
    }
    EXPECT_TRUE(touches) << i;
  }
}

TEST(Grid, StepBlocksFivePercentOfTheChannel) {
  const Mesh m = build_grid(bfs_config().grid);
  const double blocked = static_cast<double>(m.flags.count(CellFlag::Blocked)) * m.grid.cell_volume();
  const double box = 0.098 * 0.049 * 0.98;
  EXPECT_NEAR(blocked / box, 0.049 * 0.049 * 0.098 / box, 1e-12);
  EXPECT_NEAR(blocked / box, 0.05, 1e-12);
  EXPECT_EQ(m.flags.count(CellFlag::Blocked), 10u * 10u * 10u);
}

TEST(Grid, RegionOutsideDomainRejected) {
  GridConfig c;
  c.regions = {{CellFlag::Blocked, {0.5, 0.5, 0.5}, {1.5, 1.0, 1.0}}};
  EXPECT_THROW(build_grid(c), GeometryError);
}

TEST(Grid, ContradictoryOverlapRejected) {
  GridConfig c;
  c.cells = {4, 4, 4};
  c.regions = {{CellFlag::Inlet, {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}},
               {CellFlag::Outlet, {0.0, 0.0, 0.0}, {0.5, 0.5, 0.0}}};
  EXPECT_THROW(build_grid(c), GeometryError);
}

TEST(Grid, TooFewCellsRejected) {
  GridConfig c;
  c.cells = {1, 2, 2};
  EXPECT_THROW(build_grid(c), GeometryError);
}

TEST(Grid, CellOfPointCenterAndTieBreak) {
  const GridSpec g = box_mesh({4, 3, 5}, {0.4, 0.3, 0.5}).grid;
  EXPECT_EQ(cell_of_point({0.05, 0.05, 0.05}, g), g.index(1, 1, 1));
  EXPECT_EQ(cell_of_point({0.15, 0.05, 0.05}, g), g.index(2, 1, 1));
  EXPECT_EQ(cell_of_point({0.1, 0.05, 0.05}, g), g.index(2, 1, 1));
  EXPECT_THROW(cell_of_point({0.4 + 0.2, 0.05, 0.05}, g), GeometryError);
}

TEST(Grid, CellOfPointInvertsCellCenter) {
  const GridSpec g = box_mesh({5, 4, 3}, {0.5, 0.2, 0.9}).grid;
  for (int k = 1; k <= 3; ++k)
    for (int j = 1; j <= 4; ++j)
      for (int i = 1; i <= 5; ++i) EXPECT_EQ(cell_of_point(g.cell_center({i, j, k}), g), g.index(i, j, k));
}

TEST(Grid, StencilAtNodeIsExact) {
  const GridSpec g = box_mesh({4, 4, 4}).grid;
  const Vec3 node = g.cell_center({2, 3, 2});
  const InterpStencil s = trilinear_stencil(node, g, Lattice::Cell);
  double at_node = 0.0;
  for (int m = 0; m < 8; ++m) {
    if (s.node[m] == g.index(2, 3, 2)) at_node += s.weight[m];
    else EXPECT_EQ(s.weight[m], 0.0);
  }
  EXPECT_EQ(at_node, 1.0);
}

TEST(Grid, StencilAtCentroidIsUniform) {
  const GridSpec g = box_mesh({4, 4, 4}).grid;
  const InterpStencil s = trilinear_stencil({0.25, 0.5, 0.5}, g, Lattice::Cell);
  for (double w : s.weight) EXPECT_DOUBLE_EQ(w, 0.125);
}

TEST(Grid, StencilQuarterOffsetWeights) {
  const GridSpec g = box_mesh({4, 4, 4}).grid;
  // A quarter cell from the centre of (2,2,2) towards +x, halfway between nodes in y and z.
  const InterpStencil s = trilinear_stencil({0.375 + 0.0625, 0.5, 0.5}, g, Lattice::Cell);
  int big = 0, small = 0;
  for (double w : s.weight) {
    if (std::abs(w - 0.1875) < 1e-15) ++big;
    if (std::abs(w - 0.0625) < 1e-15) ++small;
  }
  EXPECT_EQ(big, 4);
  EXPECT_EQ(small, 4);
  EXPECT_EQ(std::accumulate(s.weight.begin(), s.weight.end(), 0.0), 1.0);
}

TEST(Grid, FaceLatticeStencil) {
  const GridSpec g = box_mesh({4, 4, 4}).grid;
  const Vec3 face = g.node_position(Lattice::FaceX, {2, 2, 2});
  EXPECT_DOUBLE_EQ(face[0], 0.5);
  EXPECT_DOUBLE_EQ(face[1], 0.375);
  const InterpStencil s = trilinear_stencil(face, g, Lattice::FaceX);
  for (int m = 0; m < 8; ++m)
    if (s.node[m] == g.index(2, 2, 2)) {
      EXPECT_EQ(s.weight[m], 1.0);
    }
}

TEST(Grid, StencilOutsideInteriorThrows) {
  const GridSpec g = box_mesh({4, 4, 4}).grid;
  EXPECT_THROW(trilinear_stencil({-0.01, 0.5, 0.5}, g, Lattice::Cell), GeometryError);
}

TEST(GridProperty, PartitionOfUnityAndLocality) {
  const GridSpec g = box_mesh({7, 5, 6}, {0.7, 0.25, 1.2}).grid;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ux(0.0, 0.7), uy(0.0, 0.25), uz(0.0, 1.2);
  for (int trial = 0; trial < 250000; ++trial) {
    const Vec3 pos{ux(rng), uy(rng), uz(rng)};
    for (Lattice lat : {Lattice::Cell, Lattice::FaceX, Lattice::FaceY, Lattice::FaceZ}) {
      const InterpStencil s = trilinear_stencil(pos, g, lat);
      double sum = 0.0;
      for (int m = 0; m < 8; ++m) {
        ASSERT_GE(s.weight[m], 0.0);
        ASSERT_LE(s.weight[m], 1.0);
        sum += s.weight[m];
        const Vec3 node = g.node_position(lat, g.coords(s.node[m]));
        for (int a = 0; a < 3; ++a) ASSERT_LE(std::abs(node[a] - pos[a]), g.h[a] * (1.0 + 1e-12));
      }
      ASSERT_LE(std::abs(sum - 1.0), 1e-15);
    }
  }
}
