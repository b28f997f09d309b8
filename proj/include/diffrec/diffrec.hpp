#pragma once

#include "diffrec/config.hpp"
#include "diffrec/csv.hpp"
#include "diffrec/errors.hpp"
#include "diffrec/fd_oracle.hpp"
#include "diffrec/forward.hpp"
#include "diffrec/function_spec.hpp"
#include "diffrec/grid.hpp"
#include "diffrec/inverse.hpp"
#include "diffrec/problem.hpp"
#include "diffrec/run.hpp"
#include "diffrec/spectral.hpp"
#include "diffrec/validation.hpp"
