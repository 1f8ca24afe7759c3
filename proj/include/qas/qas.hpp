#pragma once

// Umbrella header for the qas library.

#include "qas/bench.hpp"
#include "qas/bias.hpp"
#include "qas/engine.hpp"
#include "qas/errors.hpp"
#include "qas/exact_cover.hpp"
#include "qas/io.hpp"
#include "qas/ising.hpp"
#include "qas/results.hpp"
#include "qas/rng.hpp"
#include "qas/schedule.hpp"
#include "qas/spin.hpp"
#include "qas/version.hpp"
