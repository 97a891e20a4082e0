#pragma once

// Umbrella header: pulls in the whole modulation toolkit.

#include "cnlm/converter.hpp"
#include "cnlm/deadtime.hpp"
#include "cnlm/errors.hpp"
#include "cnlm/io.hpp"
#include "cnlm/metrics.hpp"
#include "cnlm/modulation.hpp"
#include "cnlm/scenario.hpp"
#include "cnlm/signals.hpp"
#include "cnlm/simulation.hpp"
#include "cnlm/sweep.hpp"
