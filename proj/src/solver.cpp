#include "sbridge/solver.hpp"

#include "sbridge/diagnostics.hpp"
#include "sbridge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sbridge {

namespace {

double max_over_modes(const std::vector<std::vector<double>>& per_mode, std::vector<double>& out)
{
    out.clear();
    double worst = 0.0;
    for (const auto& r : per_mode) {
        const double m = max_abs(r);
        out.push_back(m);
        if (std::isnan(m) || std::isnan(worst)) {
            worst = std::numeric_limits<double>::quiet_NaN();
        } else {
            worst = std::max(worst, m);
        }
    }
    return worst;
}

bool converged(double worst, double tolerance) noexcept
{
    return worst <= tolerance;  // false for NaN
}

}  // namespace

double solve_scaling_root(double a, double b, double c)
{
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) || a < 0.0 || b < 0.0) {
        throw RootDomainError("scaling root needs finite a >= 0, b >= 0 and finite c");
    }
    if (a > 0.0) {
        if (b > 0.0) {
            // Positive root of a*x^2 - c*x - b = 0, written to avoid cancellation.
            const double disc = std::hypot(c, 2.0 * std::sqrt(a) * std::sqrt(b));
            return c >= 0.0 ? (c + disc) / (2.0 * a) : (2.0 * b) / (disc - c);
        }
        if (c > 0.0) return c / a;
        throw RootDomainError("only positive mass reaches this index but its target is not positive");
    }
    if (b > 0.0) {
        if (c < 0.0) return b / -c;
        throw RootDomainError("only negative mass reaches this index but its target is not negative");
    }
    if (c == 0.0) return 1.0;
    throw RootDomainError("no mass reaches this index but its target is nonzero");
}

ScalingState ScalingState::unit(const Shape& shape)
{
    ScalingState s;
    s.factors.reserve(shape.size());
    for (std::size_t n : shape) s.factors.emplace_back(n, 1.0);
    return s;
}

bool ScalingState::within_guard(double guard) const noexcept
{
    const double lo = 1.0 / guard;
    for (const auto& f : factors) {
        for (double x : f) {
            if (!(x >= lo && x <= guard)) return false;
        }
    }
    return true;
}

std::string_view to_string(SolveStatus status) noexcept
{
    switch (status) {
    case SolveStatus::Converged:
        return "converged";
    case SolveStatus::MaxIterations:
        return "max_iterations";
    case SolveStatus::Diverged:
        return "diverged";
    }
    return "unknown";
}

ActiveSupport::ActiveSupport(const BridgeProblem& problem) : order_(problem.order())
{
    const Layout& layout = problem.prior.layout();
    for (std::size_t flat = 0; flat < problem.prior.size(); ++flat) {
        if (!problem.is_active(flat)) continue;
        flat_.push_back(flat);
        prior_.push_back(problem.prior[flat]);
        for (std::size_t m = 0; m < order_; ++m) {
            index_.push_back(layout.mode_index(flat, m));
            sign_.push_back(problem.templates[m][flat]);
        }
    }
}

double ActiveSupport::weight(std::size_t e, const ScalingState& state, std::size_t skip) const noexcept
{
    double w = prior_[e];
    for (std::size_t m = 0; m < order_; ++m) {
        if (m == skip) continue;
        const double f = state.factors[m][index(e, m)];
        w = sign(e, m) > 0 ? w * f : w / f;
    }
    return w;
}

DenseTensor reconstruct_posterior(const BridgeProblem& problem, const ActiveSupport& support, const ScalingState& state)
{
    DenseTensor p(problem.prior.shape());
    for (std::size_t e = 0; e < support.size(); ++e) {
        p[support.flat(e)] = support.weight(e, state, support.order());
    }
    return p;
}

DenseTensor reconstruct_posterior(const BridgeProblem& problem, const ScalingState& state)
{
    return reconstruct_posterior(problem, ActiveSupport(problem), state);
}

ScalingState mode_update(const ScalingState& state, const BridgeProblem& problem, std::size_t mode)
{
    return mode_update(state, problem, ActiveSupport(problem), mode);
}

ScalingState mode_update(const ScalingState& state, const BridgeProblem& problem, const ActiveSupport& support,
                         std::size_t mode)
{
    if (mode >= problem.order()) {
        throw ModeError("mode " + std::to_string(mode) + " out of range for order " +
                        std::to_string(problem.order()));
    }
    const std::size_t extent = problem.prior.shape()[mode];
    std::vector<double> pos(extent, 0.0), neg(extent, 0.0);
    for (std::size_t e = 0; e < support.size(); ++e) {
        const double w = support.weight(e, state, mode);
        (support.sign(e, mode) > 0 ? pos : neg)[support.index(e, mode)] += w;
    }

    ScalingState next = state;
    auto& factor = next.factors[mode];
    const auto& target = problem.marginals[mode];
    for (std::size_t t = 0; t < extent; ++t) {
        if (!problem.is_constrained(mode, t)) {
            factor[t] = 1.0;
            continue;
        }
        if (pos[t] == 0.0 && neg[t] == 0.0 && target[t] != 0.0) {
            throw InfeasibleStructureError("mode " + std::to_string(mode) + " index " + std::to_string(t) +
                                               ": no active entries but target is " + std::to_string(target[t]),
                                           mode, t);
        }
        try {
            factor[t] = solve_scaling_root(pos[t], neg[t], target[t]);
        } catch (const RootDomainError& e) {
            throw RootDomainError("mode " + std::to_string(mode) + " index " + std::to_string(t) + ": " + e.what());
        }
    }
    return next;
}

double dual_objective(const ScalingState& state, const BridgeProblem& problem)
{
    return dual_objective(state, problem, ActiveSupport(problem));
}

double dual_objective(const ScalingState& state, const BridgeProblem& problem, const ActiveSupport& support)
{
    double mass = 0.0;
    for (std::size_t e = 0; e < support.size(); ++e) mass += support.weight(e, state, support.order());
    double linear = 0.0;
    for (std::size_t m = 0; m < problem.order(); ++m) {
        for (std::size_t t = 0; t < state.factors[m].size(); ++t) {
            if (!problem.is_constrained(m, t)) continue;
            linear += std::log(state.factors[m][t]) * problem.marginals[m][t];
        }
    }
    return -mass + linear;
}

BridgeSolution solve_generalized(const BridgeProblem& problem)
{
    require_valid(problem);
    const SolveOptions& opt = problem.options;
    const ActiveSupport support(problem);
    const std::size_t k = problem.order();

    BridgeSolution sol;
    sol.factors = ScalingState::unit(problem.prior.shape());
    if (opt.record_trace) sol.trace.emplace();

    sol.posterior = reconstruct_posterior(problem, support, sol.factors);
    double worst = max_over_modes(residuals(sol.posterior, problem), sol.final_residuals);
    if (converged(worst, opt.tolerance)) {
        sol.status = SolveStatus::Converged;
        return sol;
    }

    for (std::size_t sweep = 1; sweep <= opt.max_iterations; ++sweep) {
        sol.iterations_used = sweep;
        for (std::size_t m = 0; m < k; ++m) {
            TraceRow row{sweep, m, 0.0, 0.0, 0.0};
            if (sol.trace) {
                const auto r = mode_residual(reconstruct_posterior(problem, support, sol.factors), problem, m);
                row.residual_inf = max_abs(r);
                row.residual_l2 = l2_norm(r);
            }
            sol.factors = mode_update(sol.factors, problem, support, m);
            if (sol.trace) {
                row.dual_value = dual_objective(sol.factors, problem, support);
                sol.trace->push_back(row);
            }
            if (!sol.factors.within_guard(opt.overflow_guard)) {
                sol.status = SolveStatus::Diverged;
                sol.posterior = reconstruct_posterior(problem, support, sol.factors);
                max_over_modes(residuals(sol.posterior, problem), sol.final_residuals);
                return sol;
            }
        }
        sol.posterior = reconstruct_posterior(problem, support, sol.factors);
        worst = max_over_modes(residuals(sol.posterior, problem), sol.final_residuals);
        if (converged(worst, opt.tolerance)) {
            sol.status = SolveStatus::Converged;
            return sol;
        }
    }
    sol.status = SolveStatus::MaxIterations;
    return sol;
}

BridgeSolution classical_sinkhorn(const DenseTensor& prior, std::span<const double> p, std::span<const double> q,
                                  const SolveOptions& options)
{
    if (prior.order() != 2) throw ShapeError("classical Sinkhorn needs a matrix prior");
    const std::size_t rows = prior.shape()[0], cols = prior.shape()[1];
    if (p.size() != rows || q.size() != cols) throw ShapeError("marginal lengths do not match the prior");
    for (double x : prior.values()) {
        if (!(x >= 0.0)) throw std::invalid_argument("prior entries must be nonnegative");
    }
    for (double x : p) {
        if (!(x >= 0.0)) throw std::invalid_argument("row marginal entries must be nonnegative");
    }
    for (double x : q) {
        if (!(x >= 0.0)) throw std::invalid_argument("column marginal entries must be nonnegative");
    }

    auto at = [&](std::size_t i, std::size_t j) { return prior[i * cols + j]; };
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += at(i, j);
        if (s == 0.0 && p[i] > 0.0) {
            throw InfeasibleStructureError("row " + std::to_string(i) + " is empty but its marginal is positive", 0, i);
        }
    }
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += at(i, j);
        if (s == 0.0 && q[j] > 0.0) {
            throw InfeasibleStructureError("column " + std::to_string(j) + " is empty but its marginal is positive", 1,
                                           j);
        }
    }

    BridgeSolution sol;
    sol.factors = ScalingState::unit(prior.shape());
    auto& u = sol.factors.factors[0];
    auto& v = sol.factors.factors[1];

    auto assemble = [&] {
        DenseTensor out(prior.shape());
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = at(i, j) * u[i] * v[j];
        }
        return out;
    };
    auto check = [&] {
        std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) row_sum[i] += sol.posterior[i * cols + j];
        }
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) col_sum[j] += sol.posterior[i * cols + j];
        }
        for (std::size_t i = 0; i < rows; ++i) row_sum[i] -= p[i];
        for (std::size_t j = 0; j < cols; ++j) col_sum[j] -= q[j];
        return max_over_modes({row_sum, col_sum}, sol.final_residuals);
    };

    sol.posterior = assemble();
    if (converged(check(), options.tolerance)) {
        sol.status = SolveStatus::Converged;
        return sol;
    }
    for (std::size_t sweep = 1; sweep <= options.max_iterations; ++sweep) {
        sol.iterations_used = sweep;
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += at(i, j) * v[j];
            u[i] = s > 0.0 ? p[i] / s : 1.0;
        }
        for (std::size_t j = 0; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows; ++i) s += at(i, j) * u[i];
            v[j] = s > 0.0 ? q[j] / s : 1.0;
        }
        sol.posterior = assemble();
        const double worst = check();
        if (!sol.factors.within_guard(options.overflow_guard)) {
            sol.status = SolveStatus::Diverged;
            return sol;
        }
        if (converged(worst, options.tolerance)) {
            sol.status = SolveStatus::Converged;
            return sol;
        }
    }
    sol.status = SolveStatus::MaxIterations;
    return sol;
}

double kl_objective(const DenseTensor& posterior, const DenseTensor& prior)
{
    if (posterior.shape() != prior.shape()) throw ShapeError("kl_objective: shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const double pv = posterior[i], qv = prior[i];
        if (qv == 0.0) {
            if (pv != 0.0) throw AbsoluteContinuityError("posterior has mass where the prior is zero");
            continue;
        }
        if (pv == 0.0) continue;
        acc += pv * (std::log(pv / qv) - 1.0);
    }
    return acc;
}

}  // namespace sbridge
