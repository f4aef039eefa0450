// Umbrella header.
#pragma once

#include "hetnet/allocation.hpp"
#include "hetnet/cutting_plane.hpp"
#include "hetnet/direct_lp.hpp"
#include "hetnet/energy_solver.hpp"
#include "hetnet/experiments.hpp"
#include "hetnet/feasibility.hpp"
#include "hetnet/lp.hpp"
#include "hetnet/patterns.hpp"
#include "hetnet/rates.hpp"
#include "hetnet/scenario.hpp"
