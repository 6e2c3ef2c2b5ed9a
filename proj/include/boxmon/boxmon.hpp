#pragma once

#include "boxmon/error.hpp"
#include "boxmon/geometry.hpp"
#include "boxmon/coverage.hpp"
#include "boxmon/kmeans.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/monitor_io.hpp"
#include "boxmon/evaluation.hpp"
#include "boxmon/feature_file.hpp"
