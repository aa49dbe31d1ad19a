#pragma once

#include "lad/types.hpp"
#include "lad/linalg.hpp"
#include "lad/weights.hpp"
#include "lad/sampling.hpp"
#include "lad/precondition.hpp"
#include "lad/initializer.hpp"
#include "lad/smoothing.hpp"
#include "lad/sgd.hpp"
#include "lad/katyusha.hpp"
#include "lad/solver.hpp"
#include "lad/oracle.hpp"
#include "lad/instance_gen.hpp"
#include "lad/matrix_market.hpp"
#include "lad/report.hpp"
