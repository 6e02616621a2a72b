#pragma once

// Umbrella header.

#include "refloc/bench.hpp"
#include "refloc/geometry.hpp"
#include "refloc/instances.hpp"
#include "refloc/locate.hpp"
#include "refloc/norms.hpp"
#include "refloc/refraction.hpp"
#include "refloc/socp.hpp"
#include "refloc/svg.hpp"
