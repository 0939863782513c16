#pragma once

#include "cell.hpp"
#include "core_math.hpp"
#include "energy.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "minimize.hpp"
#include "parallel.hpp"
