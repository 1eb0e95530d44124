#pragma once

#include "analysis.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "json_io.hpp"
#include "matrix.hpp"
#include "matrix_io.hpp"
#include "partition.hpp"
#include "rng.hpp"
#include "sketch.hpp"
