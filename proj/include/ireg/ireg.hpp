#pragma once

#include "ireg/bench.hpp"
#include "ireg/errors.hpp"
#include "ireg/indirect.hpp"
#include "ireg/lasso.hpp"
#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/precision.hpp"
#include "ireg/report.hpp"
#include "ireg/ridge.hpp"
#include "ireg/rng.hpp"
#include "ireg/rrr.hpp"
#include "ireg/simgen.hpp"
#include "ireg/tuning.hpp"
