#pragma once

#include "rotosense/spin_core.hpp"
#include "rotosense/states.hpp"
#include "rotosense/metrology.hpp"
#include "rotosense/measurement.hpp"
#include "rotosense/bell_analysis.hpp"
#include "rotosense/circuit_sim.hpp"
#include "rotosense/estimation.hpp"
#include "rotosense/io.hpp"
