#pragma once

// Slow reference solver and brute-force marginal summation used to
// cross-check the coordinate-ascent solver on small instances. Shares no
// code with the solver's update path.

#include "sbridge/problem.hpp"
#include "sbridge/solver.hpp"
#include "sbridge/tensor.hpp"

#include <cstddef>
#include <vector>

namespace sbridge {

struct OracleOptions {
    /// Line search gives up once the trial step falls below this.
    double step_tolerance = 1e-30;
    /// Stop when every constrained residual (dual gradient entry) is below this.
    double gradient_tolerance = 1e-12;
    std::size_t max_steps = 200000;
};

/// Largest total index count (sum of extents) the oracle accepts.
constexpr std::size_t oracle_max_indices = 64;

/// Full-gradient ascent on the dual over all multipliers at once, with a
/// Barzilai-Borwein trial step and halving backtracking.
///
/// Throws ValidationError for invalid problems, ShapeError above the size
/// limit and OracleFailed when the gradient tolerance is not reached.
BridgeSolution oracle_solve(const BridgeProblem& problem, const OracleOptions& options = {});

/// Same contract as diagnostics::residuals, computed by plain enumeration of
/// every multi-index.
std::vector<std::vector<double>> brute_force_marginal_check(const DenseTensor& posterior,
                                                            const BridgeProblem& problem);

}  // namespace sbridge
