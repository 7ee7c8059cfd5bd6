#pragma once

#include "ybflow/model.hpp"
#include "ybflow/grid.hpp"
#include "ybflow/quadrature.hpp"
#include "ybflow/linalg.hpp"
#include "ybflow/profiles.hpp"
#include "ybflow/trajectory.hpp"
#include "ybflow/norms.hpp"
#include "ybflow/spectral.hpp"
#include "ybflow/errorterms.hpp"
#include "ybflow/flow.hpp"
#include "ybflow/params.hpp"
#include "ybflow/construct.hpp"
#include "ybflow/diagnostics.hpp"
#include "ybflow/config.hpp"
#include "ybflow/io.hpp"
