#pragma once

#include "cce/common.hpp"
#include "cce/efg.hpp"
#include "cce/evaluation.hpp"
#include "cce/experiment.hpp"
#include "cce/game_io.hpp"
#include "cce/game_spec.hpp"
#include "cce/games.hpp"
#include "cce/joint.hpp"
#include "cce/reconstruction.hpp"
#include "cce/regret.hpp"
#include "cce/rng.hpp"
#include "cce/solvers.hpp"
#include "cce/strategy.hpp"
