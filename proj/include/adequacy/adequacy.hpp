#pragma once

#include "adequacy/analytics.hpp"
#include "adequacy/cli.hpp"
#include "adequacy/csv.hpp"
#include "adequacy/experiments.hpp"
#include "adequacy/linear_program.hpp"
#include "adequacy/lp_builder.hpp"
#include "adequacy/outputs.hpp"
#include "adequacy/scenario.hpp"
#include "adequacy/simplex.hpp"
#include "adequacy/solution_check.hpp"
#include "adequacy/types.hpp"
#include "adequacy/voll.hpp"
