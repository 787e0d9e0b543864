#pragma once

#include "asymptotics.hpp"
#include "config.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "fit.hpp"
#include "gasket.hpp"
#include "numerics.hpp"
#include "occupancy.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "space_model.hpp"
