#pragma once

#include "polytoep/errors.hpp"
#include "polytoep/gaussian_rational.hpp"
#include "polytoep/laurent.hpp"
#include "polytoep/symbol.hpp"
#include "polytoep/series.hpp"
#include "polytoep/linalg.hpp"
#include "polytoep/toeplitz.hpp"
#include "polytoep/variables.hpp"
#include "polytoep/checks.hpp"
#include "polytoep/structure.hpp"
#include "polytoep/json_io.hpp"
#include "polytoep/run_config.hpp"
