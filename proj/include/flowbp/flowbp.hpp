#pragma once

#include "flowbp/bp.hpp"
#include "flowbp/fpras.hpp"
#include "flowbp/generate.hpp"
#include "flowbp/instance_io.hpp"
#include "flowbp/instances.hpp"
#include "flowbp/mcfo.hpp"
#include "flowbp/network.hpp"
#include "flowbp/oracles.hpp"
#include "flowbp/pwl.hpp"
#include "flowbp/pwl_json.hpp"
#include "flowbp/report.hpp"
#include "flowbp/residual.hpp"
