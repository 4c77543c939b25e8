#pragma once

#include "mppic/config.hpp"

namespace mppic {

/// 12 x 72 x 12 cm column on 27 x 162 x 27 cells, y vertical, 0.5 m/s inlet, 12 cm bed of
/// 400 um particles at eps_g = 0.42 with omega = 10.
RunConfig verification_bed_config();

/// Desk-scale bubbling bed: 12 x 12 x 36 cm on `cells` (default 12 x 12 x 36), z vertical,
/// 0.15 m/s inlet, 12 cm bed of 200 um particles at eps_p = 0.58 with weight `omega`.
/// The probe sits in the middle of the initial bed.
RunConfig desk_bed_config(Index3 cells = {12, 12, 36}, double omega = 3000.0);

/// Backward-facing step channel: 9.8 x 4.9 x 98 cm on `cells` (default 20 x 10 x 100) with
/// a 4.9 x 4.9 x 9.8 cm blocked step at the inlet corner, inlet over the open half of the
/// z = 0 plane at 1 m/s, outlet at the far end, no gravity.
RunConfig bfs_config(Index3 cells = {20, 10, 100});

}  // namespace mppic
