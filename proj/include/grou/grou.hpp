#pragma once

#include "grou/error.hpp"
#include "grou/estimators.hpp"
#include "grou/graph.hpp"
#include "grou/io.hpp"
#include "grou/lasso.hpp"
#include "grou/levy.hpp"
#include "grou/likelihood.hpp"
#include "grou/linalg.hpp"
#include "grou/mc.hpp"
#include "grou/rng.hpp"
#include "grou/stats.hpp"
#include "grou/stochvol.hpp"
#include "grou/version.hpp"
