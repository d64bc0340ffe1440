#pragma once

#include "kvflow/fields.hpp"

namespace kvflow {

/// Skew-symmetric transport of w by v, (1/2)[(v . grad) w + div(v (x) w)].
///
/// Each face of w exchanges with its neighbors through the transport
/// velocity on the shared control-volume face, so <advect(v, w), w> = 0
/// exactly for any v; the convective and divergence forms agree when v is
/// discretely solenoidal.
VectorField advect(const VectorField& v, const VectorField& w);

}  // namespace kvflow
