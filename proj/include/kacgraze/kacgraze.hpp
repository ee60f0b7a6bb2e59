#pragma once

#include "kacgraze/analysis.hpp"
#include "kacgraze/dsmc.hpp"
#include "kacgraze/error.hpp"
#include "kacgraze/experiments.hpp"
#include "kacgraze/fokker_planck.hpp"
#include "kacgraze/kernel.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/quadrature.hpp"
#include "kacgraze/wild.hpp"
