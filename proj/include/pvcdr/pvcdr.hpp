#pragma once

#include "pvcdr/conjecture.hpp"
#include "pvcdr/diagnostics.hpp"
#include "pvcdr/fit.hpp"
#include "pvcdr/io.hpp"
#include "pvcdr/likelihood.hpp"
#include "pvcdr/linalg.hpp"
#include "pvcdr/models.hpp"
#include "pvcdr/parallel.hpp"
#include "pvcdr/randcov.hpp"
#include "pvcdr/rng.hpp"
#include "pvcdr/stiefel.hpp"
#include "pvcdr/svg.hpp"
