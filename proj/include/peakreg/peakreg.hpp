// Convenience umbrella: the whole library in one include.

#pragma once

#include "peakreg/types.hpp"
#include "peakreg/lp.hpp"
#include "peakreg/billing.hpp"
#include "peakreg/optimize.hpp"
#include "peakreg/synth.hpp"
#include "peakreg/peaks.hpp"
#include "peakreg/gain.hpp"
#include "peakreg/io.hpp"
