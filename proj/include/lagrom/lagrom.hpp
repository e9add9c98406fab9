#pragma once

// Umbrella header for the lagrom reduced-order modeling toolkit.

#include "lagrom/error.hpp"
#include "lagrom/core.hpp"
#include "lagrom/linalg.hpp"
#include "lagrom/rbf.hpp"
#include "lagrom/lagframe.hpp"
#include "lagrom/fom.hpp"
#include "lagrom/dmd.hpp"
#include "lagrom/pdmd.hpp"
#include "lagrom/analysis.hpp"
#include "lagrom/io.hpp"
#include "lagrom/recipes.hpp"
