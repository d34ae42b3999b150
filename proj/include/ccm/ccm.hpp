#pragma once

// Umbrella header for the cohort comfort modeling library.

#include "ccm/cluster.hpp"
#include "ccm/cohort.hpp"
#include "ccm/cohort_io.hpp"
#include "ccm/common.hpp"
#include "ccm/csv.hpp"
#include "ccm/cv.hpp"
#include "ccm/data.hpp"
#include "ccm/eval.hpp"
#include "ccm/forest.hpp"
#include "ccm/forest_io.hpp"
#include "ccm/ingest.hpp"
#include "ccm/ini.hpp"
#include "ccm/metrics.hpp"
#include "ccm/pmv.hpp"
#include "ccm/report_io.hpp"
#include "ccm/similarity.hpp"
#include "ccm/synth.hpp"
#include "ccm/time.hpp"
