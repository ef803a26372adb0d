#pragma once

#include "corefair/cli.hpp"
#include "corefair/endowment.hpp"
#include "corefair/enumerate.hpp"
#include "corefair/errors.hpp"
#include "corefair/fractional.hpp"
#include "corefair/generators.hpp"
#include "corefair/instance.hpp"
#include "corefair/io.hpp"
#include "corefair/lp.hpp"
#include "corefair/matching.hpp"
#include "corefair/matroid.hpp"
#include "corefair/objective.hpp"
#include "corefair/optimum.hpp"
#include "corefair/report.hpp"
#include "corefair/rng.hpp"
#include "corefair/rounding.hpp"
#include "corefair/verifier.hpp"
