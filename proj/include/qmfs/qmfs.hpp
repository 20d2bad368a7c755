#pragma once

#include "qmfs/config_io.hpp"
#include "qmfs/csv.hpp"
#include "qmfs/dynamics.hpp"
#include "qmfs/error.hpp"
#include "qmfs/linalg.hpp"
#include "qmfs/model.hpp"
#include "qmfs/montecarlo.hpp"
#include "qmfs/optimize.hpp"
#include "qmfs/readout.hpp"
#include "qmfs/source.hpp"
#include "qmfs/transmon.hpp"

namespace qmfs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qmfs
