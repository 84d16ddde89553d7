#pragma once

#include "owod/benchmark.hpp"
#include "owod/cec.hpp"
#include "owod/coco_io.hpp"
#include "owod/errors.hpp"
#include "owod/geometry.hpp"
#include "owod/manifest.hpp"
#include "owod/matching.hpp"
#include "owod/metrics.hpp"
#include "owod/pad.hpp"
#include "owod/types.hpp"
