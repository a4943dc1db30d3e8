#pragma once

#include "twobody/binding.hpp"
#include "twobody/cli.hpp"
#include "twobody/dynamics.hpp"
#include "twobody/errors.hpp"
#include "twobody/ode.hpp"
#include "twobody/plot.hpp"
#include "twobody/scenario.hpp"
#include "twobody/sta.hpp"
#include "twobody/table.hpp"
