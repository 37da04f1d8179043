#pragma once

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/hash.hpp"
#include "gaitforge/core/parallel.hpp"
#include "gaitforge/core/rng.hpp"
#include "gaitforge/datamodel.hpp"
#include "gaitforge/io/accel_csv.hpp"
#include "gaitforge/io/binary.hpp"
#include "gaitforge/io/manifest.hpp"
#include "gaitforge/io/pnm.hpp"
#include "gaitforge/numerics/kmeans.hpp"
#include "gaitforge/numerics/linear_svm.hpp"
#include "gaitforge/numerics/matrix.hpp"
#include "gaitforge/numerics/sym_eigen.hpp"
#include "gaitforge/accel.hpp"
#include "gaitforge/eigengait.hpp"
#include "gaitforge/rgbd/image_ops.hpp"
#include "gaitforge/rgbd/mask.hpp"
#include "gaitforge/rgbd/flow.hpp"
#include "gaitforge/rgbd/tracking.hpp"
#include "gaitforge/trajgait.hpp"
#include "gaitforge/recognition.hpp"
#include "gaitforge/eval/split.hpp"
#include "gaitforge/eval/metrics.hpp"
#include "gaitforge/eval/synth.hpp"
#include "gaitforge/eval/pipeline.hpp"
#include "gaitforge/eval/report.hpp"
