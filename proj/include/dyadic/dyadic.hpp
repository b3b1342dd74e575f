#pragma once

#include "dyadic/config.hpp"
#include "dyadic/cube.hpp"
#include "dyadic/cube_family.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/exponents.hpp"
#include "dyadic/grid_function.hpp"
#include "dyadic/operators.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/random.hpp"
#include "dyadic/rational.hpp"
#include "dyadic/sharpness.hpp"
#include "dyadic/sparse.hpp"
#include "dyadic/weights.hpp"
