#ifndef OCAP_OCAP_HPP
#define OCAP_OCAP_HPP

#include "ocap/averages.hpp"
#include "ocap/capacity.hpp"
#include "ocap/conditions.hpp"
#include "ocap/config.hpp"
#include "ocap/error.hpp"
#include "ocap/grid.hpp"
#include "ocap/grid_io.hpp"
#include "ocap/norms.hpp"
#include "ocap/parallel.hpp"
#include "ocap/riesz.hpp"
#include "ocap/run.hpp"
#include "ocap/strongtype.hpp"
#include "ocap/testfunctions.hpp"
#include "ocap/young.hpp"

#endif  // OCAP_OCAP_HPP
