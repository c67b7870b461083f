// Umbrella header.
#ifndef IBSOLVE_IBSOLVE_HPP
#define IBSOLVE_IBSOLVE_HPP

#include "ibsolve/abp_solver.hpp"
#include "ibsolve/ba_baseline.hpp"
#include "ibsolve/diagnostics.hpp"
#include "ibsolve/errors.hpp"
#include "ibsolve/ingest.hpp"
#include "ibsolve/oracles.hpp"
#include "ibsolve/prob_core.hpp"
#include "ibsolve/projection_kernel.hpp"
#include "ibsolve/solver_types.hpp"

#endif  // IBSOLVE_IBSOLVE_HPP
