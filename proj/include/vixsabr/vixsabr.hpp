#pragma once

// Umbrella header.

#include "vixsabr/model.hpp"
#include "vixsabr/quadrature.hpp"
#include "vixsabr/scale.hpp"
#include "vixsabr/asymptotics.hpp"
#include "vixsabr/rng.hpp"
#include "vixsabr/parallel.hpp"
#include "vixsabr/mc.hpp"
#include "vixsabr/stats.hpp"
#include "vixsabr/pricing.hpp"
#include "vixsabr/io.hpp"
#include "vixsabr/config.hpp"
#include "vixsabr/commands.hpp"
