#pragma once

#include "cnw/builtins.hpp"
#include "cnw/cost_space.hpp"
#include "cnw/diagram_export.hpp"
#include "cnw/error.hpp"
#include "cnw/extended_level.hpp"
#include "cnw/filtration.hpp"
#include "cnw/finite_oracle.hpp"
#include "cnw/flow_engine.hpp"
#include "cnw/link_engine.hpp"
#include "cnw/map_system.hpp"
#include "cnw/parallel.hpp"
#include "cnw/spatial_index.hpp"
#include "cnw/spec_file.hpp"
#include "cnw/wandering.hpp"
