#pragma once

// Umbrella header for the time-modulated nonreciprocal array toolkit.

#include "tmarray/array.hpp"
#include "tmarray/circuit.hpp"
#include "tmarray/common.hpp"
#include "tmarray/config.hpp"
#include "tmarray/conversion.hpp"
#include "tmarray/element.hpp"
#include "tmarray/harmonic_system.hpp"
#include "tmarray/spectrum_ops.hpp"
#include "tmarray/transient.hpp"
