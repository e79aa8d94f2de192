#pragma once
// Umbrella header.
#include "almost_sure.hpp"
#include "divergences.hpp"
#include "dro_set.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "families.hpp"
#include "least_favorable.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "radius.hpp"
#include "simulate.hpp"
