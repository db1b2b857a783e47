#pragma once

#include "aura/clustering.hpp"
#include "aura/dataset.hpp"
#include "aura/error.hpp"
#include "aura/matrix.hpp"
#include "aura/metrics.hpp"
#include "aura/random.hpp"
#include "aura/report.hpp"
#include "aura/sampling.hpp"
#include "aura/simulator.hpp"
