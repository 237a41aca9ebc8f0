#pragma once

#include "bandwidth.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "noise.hpp"
#include "rng.hpp"
#include "simharness.hpp"
#include "theory.hpp"
