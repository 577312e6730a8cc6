#pragma once

#include "tripod/analytic.hpp"
#include "tripod/core.hpp"
#include "tripod/errors.hpp"
#include "tripod/oracle.hpp"
#include "tripod/physical.hpp"
#include "tripod/profile.hpp"
#include "tripod/reduced.hpp"
#include "tripod/runner.hpp"
#include "tripod/scenario.hpp"
