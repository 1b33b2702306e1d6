#pragma once

#include "phi/arch_config.hpp"
#include "phi/binmat.hpp"
#include "phi/calibration.hpp"
#include "phi/compute.hpp"
#include "phi/corpus.hpp"
#include "phi/decompose.hpp"
#include "phi/error.hpp"
#include "phi/formats.hpp"
#include "phi/packing.hpp"
#include "phi/report.hpp"
#include "phi/simulator.hpp"
#include "phi/sweep.hpp"
