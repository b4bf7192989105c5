#pragma once

#include "hv3d/aggregate.hpp"
#include "hv3d/cyclopean.hpp"
#include "hv3d/dct.hpp"
#include "hv3d/depth.hpp"
#include "hv3d/distortions.hpp"
#include "hv3d/evaluation.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/plane.hpp"
#include "hv3d/video_io.hpp"
