#pragma once

#include "avexpr/adamw.hpp"
#include "avexpr/alignment.hpp"
#include "avexpr/binary_io.hpp"
#include "avexpr/class_weights.hpp"
#include "avexpr/error.hpp"
#include "avexpr/feature_file.hpp"
#include "avexpr/folds.hpp"
#include "avexpr/frame_set.hpp"
#include "avexpr/fusion.hpp"
#include "avexpr/imageops.hpp"
#include "avexpr/labels.hpp"
#include "avexpr/layers.hpp"
#include "avexpr/loss.hpp"
#include "avexpr/manifest.hpp"
#include "avexpr/matrix.hpp"
#include "avexpr/metrics.hpp"
#include "avexpr/moe_head.hpp"
#include "avexpr/params.hpp"
#include "avexpr/records.hpp"
#include "avexpr/rng.hpp"
#include "avexpr/smoothing.hpp"
#include "avexpr/synthetic.hpp"
#include "avexpr/targets.hpp"
#include "avexpr/tensor_container.hpp"
#include "avexpr/trainer.hpp"
