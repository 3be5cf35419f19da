#pragma once

// Umbrella header: everything needed to go from a simulation bundle to
// detected and clustered load-paths.

#include "crashgraph/bundle.hpp"
#include "crashgraph/energy.hpp"
#include "crashgraph/errors.hpp"
#include "crashgraph/extract.hpp"
#include "crashgraph/geometry.hpp"
#include "crashgraph/graph.hpp"
#include "crashgraph/io.hpp"
#include "crashgraph/loadpath.hpp"
#include "crashgraph/segmentation.hpp"
#include "crashgraph/synth.hpp"

namespace crashgraph {
inline constexpr const char* kToolVersion = "0.1.0";
}
