#pragma once

#include "limitlab/basins.hpp"
#include "limitlab/catalog.hpp"
#include "limitlab/config.hpp"
#include "limitlab/dictionary.hpp"
#include "limitlab/domain.hpp"
#include "limitlab/dynamics.hpp"
#include "limitlab/error.hpp"
#include "limitlab/format.hpp"
#include "limitlab/hausdorff.hpp"
#include "limitlab/immersion.hpp"
#include "limitlab/io.hpp"
#include "limitlab/lift.hpp"
#include "limitlab/limits.hpp"
#include "limitlab/linear.hpp"
#include "limitlab/parallel.hpp"
#include "limitlab/state.hpp"
