#pragma once

// Umbrella header for the intrinsic geometrically exact beam library:
// first-order model data, FEM semi-discretization, implicit-midpoint time
// stepping, centerline/frame reconstruction, Lyapunov stability certificates
// for boundary velocity feedback, and their network (star) extension.

#include "igeb/beam.hpp"
#include "igeb/config.hpp"
#include "igeb/diagonal.hpp"
#include "igeb/errors.hpp"
#include "igeb/fem.hpp"
#include "igeb/integrate.hpp"
#include "igeb/io.hpp"
#include "igeb/linalg.hpp"
#include "igeb/lyapunov.hpp"
#include "igeb/mesh.hpp"
#include "igeb/network.hpp"
#include "igeb/presets.hpp"
#include "igeb/quaternion.hpp"
#include "igeb/reconstruct.hpp"
#include "igeb/weights.hpp"
