#pragma once

#include "planarip/geom.hpp"
#include "planarip/io.hpp"
#include "planarip/lp_format.hpp"
#include "planarip/metrics.hpp"
#include "planarip/model.hpp"
#include "planarip/pipeline.hpp"
#include "planarip/program.hpp"
#include "planarip/simdet.hpp"
#include "planarip/simplex.hpp"
#include "planarip/solver.hpp"
#include "planarip/svg.hpp"
