#pragma once

// Wi-Fi CSI lossy-compression and sensing toolkit: data model and
// interchange formats, classic and neural compressors, sensing
// classifiers, and the rate/accuracy sweep harness.

#include "csi/error.hpp"
#include "csi/rng.hpp"
#include "csi/sha256.hpp"
#include "csi/linalg.hpp"
#include "csi/types.hpp"
#include "csi/io.hpp"
#include "csi/preprocess.hpp"
#include "csi/windowing.hpp"
#include "csi/pca.hpp"
#include "csi/lloyd_max.hpp"
#include "csi/kmeans.hpp"
#include "csi/nn.hpp"
#include "csi/vae.hpp"
#include "csi/mlp.hpp"
#include "csi/sensing.hpp"
#include "csi/metrics.hpp"
#include "csi/scheme.hpp"
#include "csi/model_io.hpp"
#include "csi/container.hpp"
#include "csi/synth.hpp"
#include "csi/harness.hpp"
#include "csi/version.hpp"
