#pragma once

#include "gcfrft/error.hpp"
#include "gcfrft/types.hpp"
#include "gcfrft/graph.hpp"
#include "gcfrft/fractional.hpp"
#include "gcfrft/coupling.hpp"
#include "gcfrft/transforms.hpp"
#include "gcfrft/derivatives.hpp"
#include "gcfrft/parallel.hpp"
#include "gcfrft/wiener.hpp"
#include "gcfrft/synth.hpp"
#include "gcfrft/metrics.hpp"
#include "gcfrft/io.hpp"
#include "gcfrft/benchmark.hpp"
#include "gcfrft/verify.hpp"
