#pragma once

// Generalized Sinkhorn scaling for signed marginal constraints.
//
// The posterior is kept in factor form
//
//     P[e] = prior[e] * prod_l factor_l[e_l] ^ template_l[e]
//
// where factor_l[t] = exp(-multiplier_l[t]). Updating one mode is an exact
// maximization of the concave dual over that mode's multipliers: for each
// index t the new factor x solves a*x - b/x = marginal_l[t], with a and b the
// prior mass reaching t through +1 and -1 template entries, weighted by the
// other modes' current factors.

#include "sbridge/problem.hpp"
#include "sbridge/tensor.hpp"
#include "sbridge/trace.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sbridge {

/// Unique x > 0 with a*x - b/x = c.
///
/// Solvable configurations: a > 0 and b > 0 (any c); a > 0, b = 0, c > 0;
/// a = 0, b > 0, c < 0. The fully degenerate a = b = c = 0 returns 1.
/// Everything else throws RootDomainError.
double solve_scaling_root(double a, double b, double c);

struct ScalingState {
    std::vector<std::vector<double>> factors;

    /// All factors equal to one.
    static ScalingState unit(const Shape& shape);
    bool within_guard(double guard) const noexcept;

    friend bool operator==(const ScalingState&, const ScalingState&) = default;
};

enum class SolveStatus { Converged, MaxIterations, Diverged };

std::string_view to_string(SolveStatus status) noexcept;

struct BridgeSolution {
    DenseTensor posterior;
    ScalingState factors;
    std::size_t iterations_used = 0;
    /// Max-abs constrained residual per mode after the last sweep.
    std::vector<double> final_residuals;
    SolveStatus status = SolveStatus::MaxIterations;
    std::optional<ConvergenceTrace> trace;
};

/// Active entries of a problem with their per-mode indices and signs,
/// precomputed once so that sweeps touch only the support.
class ActiveSupport {
public:
    explicit ActiveSupport(const BridgeProblem& problem);

    std::size_t order() const noexcept { return order_; }
    std::size_t size() const noexcept { return flat_.size(); }
    std::size_t flat(std::size_t e) const noexcept { return flat_[e]; }
    double prior(std::size_t e) const noexcept { return prior_[e]; }
    std::size_t index(std::size_t e, std::size_t mode) const noexcept { return index_[e * order_ + mode]; }
    std::int8_t sign(std::size_t e, std::size_t mode) const noexcept { return sign_[e * order_ + mode]; }

    /// prior * prod over modes other than `skip` of factor^sign; pass skip >= order for all modes.
    double weight(std::size_t e, const ScalingState& state, std::size_t skip) const noexcept;

private:
    std::size_t order_ = 0;
    std::vector<std::size_t> flat_;
    std::vector<double> prior_;
    std::vector<std::size_t> index_;
    std::vector<std::int8_t> sign_;
};

/// Posterior implied by a scaling state; zero off the active support.
DenseTensor reconstruct_posterior(const BridgeProblem& problem, const ActiveSupport& support,
                                  const ScalingState& state);
DenseTensor reconstruct_posterior(const BridgeProblem& problem, const ScalingState& state);

/// Exact block update of one mode's factors from the frozen factors of the
/// other modes. Unconstrained indices and indices with no active entries
/// and a zero target get factor 1.
///
/// Throws InfeasibleStructureError when a constrained index has no active
/// entries but a nonzero target, and RootDomainError (naming mode and index)
/// when the target's sign cannot be reached.
ScalingState mode_update(const ScalingState& state, const BridgeProblem& problem, std::size_t mode);
ScalingState mode_update(const ScalingState& state, const BridgeProblem& problem,
                         const ActiveSupport& support, std::size_t mode);

/// Dual objective -sum(P) - sum_l sum_t multiplier_l[t] * marginal_l[t] over
/// constrained indices, with multiplier = -log(factor).
double dual_objective(const ScalingState& state, const BridgeProblem& problem);
double dual_objective(const ScalingState& state, const BridgeProblem& problem, const ActiveSupport& support);

/// Cyclic block coordinate ascent over modes 0..k-1 from unit factors.
/// Uses problem.options; throws ValidationError for an invalid problem.
BridgeSolution solve_generalized(const BridgeProblem& problem);

/// Textbook alternating row/column scaling of a nonnegative matrix.
///
/// Throws InfeasibleStructureError when a zero row or column is asked to
/// carry positive mass, ShapeError for mismatched sizes, and std::invalid_argument
/// for negative prior entries or marginals.
BridgeSolution classical_sinkhorn(const DenseTensor& prior, std::span<const double> p,
                                  std::span<const double> q, const SolveOptions& options);

/// sum over the prior support of P * (log(P/Q) - 1), with 0 * (log 0 - 1) = 0.
/// Throws AbsoluteContinuityError if P > 0 where Q = 0.
double kl_objective(const DenseTensor& posterior, const DenseTensor& prior);

}  // namespace sbridge
