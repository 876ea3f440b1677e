#pragma once

// Umbrella header: the whole pipeline plus the simulator.

#include "ofnav/classifier.hpp"
#include "ofnav/config.hpp"
#include "ofnav/dataset.hpp"
#include "ofnav/distribution.hpp"
#include "ofnav/error.hpp"
#include "ofnav/eval.hpp"
#include "ofnav/features.hpp"
#include "ofnav/image.hpp"
#include "ofnav/lk.hpp"
#include "ofnav/nav.hpp"
#include "ofnav/pca.hpp"
#include "ofnav/perceptron.hpp"
#include "ofnav/pnm.hpp"
#include "ofnav/smo.hpp"
#include "ofnav/svm.hpp"
#include "ofnav/sim/closed_loop.hpp"
#include "ofnav/sim/recorder.hpp"
#include "ofnav/sim/render.hpp"
#include "ofnav/sim/scene.hpp"
#include "ofnav/sim/texture.hpp"
