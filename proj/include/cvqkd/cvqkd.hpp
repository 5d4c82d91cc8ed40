#pragma once

#include "cvqkd/error.hpp"
#include "cvqkd/tolerances.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/security_bounds.hpp"
#include "cvqkd/attack_models.hpp"
#include "cvqkd/search_harness.hpp"
#include "cvqkd/csv.hpp"
#include "cvqkd/reporting.hpp"
