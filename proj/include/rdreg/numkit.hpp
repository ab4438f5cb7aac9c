#pragma once

#include "rdreg/numkit/grid.hpp"
#include "rdreg/numkit/linalg.hpp"
#include "rdreg/numkit/matrix.hpp"
