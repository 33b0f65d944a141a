#pragma once

#include "cell_assignment.hpp"
#include "cost.hpp"
#include "density.hpp"
#include "experiment.hpp"
#include "flownet.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "link_cost.hpp"
#include "optimize.hpp"
#include "partition.hpp"
#include "routing.hpp"
