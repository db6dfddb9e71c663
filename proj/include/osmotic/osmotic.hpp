#ifndef OSMOTIC_OSMOTIC_HPP
#define OSMOTIC_OSMOTIC_HPP

// Umbrella header for the osmotic toolkit: coherent/squeezed states in one
// dimension, their Madelung decomposition into density, phase and the
// current/osmotic momentum split, grid and closed-form moment tables, the
// uncertainty-relation ledger, Crank-Nicolson cross-validation and the
// Nelson forward diffusion sampler.

#include "osmotic/dynamics.hpp"
#include "osmotic/grid.hpp"
#include "osmotic/madelung.hpp"
#include "osmotic/moments.hpp"
#include "osmotic/nelson.hpp"
#include "osmotic/params.hpp"
#include "osmotic/report_io.hpp"
#include "osmotic/reports.hpp"
#include "osmotic/states.hpp"

#endif
