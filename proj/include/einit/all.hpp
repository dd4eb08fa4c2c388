#pragma once

#include "einit/core.hpp"
#include "einit/einit.hpp"
#include "einit/error.hpp"
#include "einit/harness.hpp"
#include "einit/icp.hpp"
#include "einit/io.hpp"
#include "einit/metrics.hpp"
#include "einit/perturb.hpp"
#include "einit/shapes.hpp"
#include "einit/spatial.hpp"
