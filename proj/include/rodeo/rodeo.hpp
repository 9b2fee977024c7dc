#pragma once

#include "rodeo/geometry.hpp"
#include "rodeo/stats.hpp"
#include "rodeo/assignment.hpp"
#include "rodeo/sample.hpp"
#include "rodeo/matching.hpp"
#include "rodeo/metric.hpp"
#include "rodeo/baselines.hpp"
#include "rodeo/random.hpp"
#include "rodeo/corruption.hpp"
#include "rodeo/synthetic.hpp"
#include "rodeo/report.hpp"
#include "rodeo/dataset_io.hpp"
#include "rodeo/sweep.hpp"
