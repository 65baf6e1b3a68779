#pragma once

#include "coopsense/errors.hpp"
#include "coopsense/random.hpp"
#include "coopsense/model.hpp"
#include "coopsense/local_detectors.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/simulator.hpp"
#include "coopsense/calibration.hpp"
#include "coopsense/analysis.hpp"
#include "coopsense/scenarios.hpp"
#include "coopsense/golden.hpp"
#include "coopsense/results_csv.hpp"
#include "coopsense/config_io.hpp"
#include "coopsense/reproduce.hpp"
#include "coopsense/jobs.hpp"
