#pragma once

#include "routecorr/bench.hpp"
#include "routecorr/conl.hpp"
#include "routecorr/error.hpp"
#include "routecorr/gev.hpp"
#include "routecorr/gevcov.hpp"
#include "routecorr/mnp.hpp"
#include "routecorr/netgraph.hpp"
#include "routecorr/routegen.hpp"
