#pragma once

// Umbrella header. lightfield_io.hpp is left out because it needs libpng.

#include "liff/baseline.hpp"
#include "liff/descriptor.hpp"
#include "liff/detector.hpp"
#include "liff/error.hpp"
#include "liff/experiment.hpp"
#include "liff/feature.hpp"
#include "liff/feature_io.hpp"
#include "liff/focal_stack.hpp"
#include "liff/gaussian.hpp"
#include "liff/grayscale.hpp"
#include "liff/image.hpp"
#include "liff/lightfield.hpp"
#include "liff/params.hpp"
#include "liff/scale_space.hpp"
#include "liff/synth.hpp"
