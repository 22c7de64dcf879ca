#pragma once

#include "uhop/analysis.hpp"
#include "uhop/capacity.hpp"
#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/hopfield.hpp"
#include "uhop/kernel.hpp"
#include "uhop/normalization.hpp"
#include "uhop/parallel.hpp"
#include "uhop/patterns.hpp"
#include "uhop/presets.hpp"
#include "uhop/rng.hpp"
#include "uhop/spherical.hpp"
#include "uhop/train.hpp"
