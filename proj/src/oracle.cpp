#include "sbridge/oracle.hpp"

#include "sbridge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sbridge {

namespace {

// Advances `idx` like an odometer, last mode fastest. Returns false after the last index.
bool next_index(MultiIndex& idx, const Shape& shape)
{
    for (std::size_t m = shape.size(); m-- > 0;) {
        if (++idx[m] < shape[m]) return true;
        idx[m] = 0;
    }
    return false;
}

struct Entry {
    std::size_t position;  // enumeration order == storage order
    double prior;
    MultiIndex idx;
    std::vector<int> signs;
};

class DualFunction {
public:
    explicit DualFunction(const BridgeProblem& problem) : problem_(problem)
    {
        const Shape& shape = problem.prior.shape();
        const std::size_t k = shape.size();
        MultiIndex idx(k, 0);
        std::size_t position = 0;
        do {
            const double q = problem.prior.values()[position];
            std::vector<int> signs(k);
            bool active = q > 0.0;
            for (std::size_t m = 0; m < k && active; ++m) {
                signs[m] = problem.templates[m].signs()[position];
                active = signs[m] != 0;
            }
            if (active) entries_.push_back({position, q, idx, std::move(signs)});
            ++position;
        } while (next_index(idx, shape));

        for (std::size_t m = 0; m < k; ++m) {
            for (std::size_t t = 0; t < shape[m]; ++t) {
                if (problem.is_constrained(m, t)) vars_.push_back({m, t});
            }
        }
    }

    std::size_t dimension() const noexcept { return vars_.size(); }

    std::vector<std::vector<double>> multipliers(const std::vector<double>& x) const
    {
        std::vector<std::vector<double>> lam;
        for (std::size_t n : problem_.prior.shape()) lam.emplace_back(n, 0.0);
        for (std::size_t v = 0; v < vars_.size(); ++v) lam[vars_[v].first][vars_[v].second] = x[v];
        return lam;
    }

    std::vector<double> entry_masses(const std::vector<double>& x) const
    {
        const auto lam = multipliers(x);
        std::vector<double> mass(entries_.size());
        for (std::size_t e = 0; e < entries_.size(); ++e) {
            double exponent = 0.0;
            for (std::size_t m = 0; m < lam.size(); ++m) {
                exponent -= lam[m][entries_[e].idx[m]] * entries_[e].signs[m];
            }
            mass[e] = entries_[e].prior * std::exp(exponent);
        }
        return mass;
    }

    /// Gradient of the dual: signed marginal of the implied posterior minus the target.
    std::vector<double> gradient(const std::vector<double>& x) const
    {
        const auto mass = entry_masses(x);
        std::vector<std::vector<double>> sums;
        for (std::size_t n : problem_.prior.shape()) sums.emplace_back(n, 0.0);
        for (std::size_t e = 0; e < entries_.size(); ++e) {
            for (std::size_t m = 0; m < sums.size(); ++m) {
                sums[m][entries_[e].idx[m]] += entries_[e].signs[m] * mass[e];
            }
        }
        std::vector<double> g(vars_.size());
        for (std::size_t v = 0; v < vars_.size(); ++v) {
            const auto [m, t] = vars_[v];
            g[v] = sums[m][t] - problem_.marginals[m][t];
        }
        return g;
    }

    DenseTensor posterior(const std::vector<double>& x) const
    {
        const auto mass = entry_masses(x);
        DenseTensor p(problem_.prior.shape());
        for (std::size_t e = 0; e < entries_.size(); ++e) p.values()[entries_[e].position] = mass[e];
        return p;
    }

private:
    const BridgeProblem& problem_;
    std::vector<Entry> entries_;
    std::vector<std::pair<std::size_t, std::size_t>> vars_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double inf_norm(const std::vector<double>& a)
{
    double best = 0.0;
    for (double x : a) best = std::isnan(x) ? x : std::max(best, std::abs(x));
    return best;
}

}  // namespace

BridgeSolution oracle_solve(const BridgeProblem& problem, const OracleOptions& options)
{
    require_valid(problem);
    const auto& shape = problem.prior.shape();
    const std::size_t total = std::accumulate(shape.begin(), shape.end(), std::size_t{0});
    if (total > oracle_max_indices) {
        throw ShapeError("oracle is limited to " + std::to_string(oracle_max_indices) + " indices, problem has " +
                         std::to_string(total));
    }

    const DualFunction dual(problem);
    std::vector<double> x(dual.dimension(), 0.0);
    std::vector<double> g = dual.gradient(x);
    double step = 1.0;
    std::size_t steps = 0;

    while (!(inf_norm(g) <= options.gradient_tolerance)) {
        if (steps == options.max_steps) {
            throw OracleFailed("gradient ascent did not reach tolerance in " + std::to_string(options.max_steps) +
                               " steps (gradient " + std::to_string(inf_norm(g)) + ")");
        }
        ++steps;

        // The dual is concave along x + s*g, and its slope there is g(x + s*g).g.
        // A trial step is accepted while that slope is still nonnegative, which
        // guarantees the dual did not decrease.
        std::vector<double> trial(x.size()), g_trial;
        for (;;) {
            if (step < options.step_tolerance) {
                throw OracleFailed("line search step fell below " + std::to_string(options.step_tolerance));
            }
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * g[i];
            g_trial = dual.gradient(trial);
            const double slope = dot(g_trial, g);
            if (std::isfinite(slope) && slope >= 0.0) break;
            step *= 0.5;
        }

        // Barzilai-Borwein estimate for the next trial step.
        std::vector<double> s(x.size()), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            s[i] = trial[i] - x[i];
            y[i] = g_trial[i] - g[i];
        }
        const double sy = dot(s, y);
        step = sy < 0.0 ? dot(s, s) / -sy : 2.0 * step;
        step = std::clamp(step, 1e-12, 1e12);

        x = std::move(trial);
        g = std::move(g_trial);
    }

    BridgeSolution sol;
    sol.posterior = dual.posterior(x);
    const auto lam = dual.multipliers(x);
    for (const auto& row : lam) {
        std::vector<double> f(row.size());
        std::transform(row.begin(), row.end(), f.begin(), [](double l) { return std::exp(-l); });
        sol.factors.factors.push_back(std::move(f));
    }
    sol.iterations_used = steps;
    for (const auto& r : brute_force_marginal_check(sol.posterior, problem)) sol.final_residuals.push_back(inf_norm(r));
    sol.status = SolveStatus::Converged;
    return sol;
}

std::vector<std::vector<double>> brute_force_marginal_check(const DenseTensor& posterior, const BridgeProblem& problem)
{
    const Shape& shape = problem.prior.shape();
    if (posterior.shape() != shape) throw ShapeError("posterior shape differs from problem shape");
    const std::size_t k = shape.size();
    if (problem.templates.size() != k || problem.marginals.size() != k) {
        throw ShapeError("problem needs one template and one marginal per mode");
    }

    std::vector<std::vector<double>> sums;
    for (std::size_t m = 0; m < k; ++m) {
        if (problem.marginals[m].size() != shape[m]) throw ShapeError("marginal length differs from extent");
        sums.emplace_back(shape[m], 0.0);
    }

    MultiIndex idx(k, 0);
    std::size_t position = 0;
    do {
        const double value = posterior.values()[position];
        for (std::size_t m = 0; m < k; ++m) {
            const int sign = problem.templates[m].signs()[position];
            if (sign > 0) {
                sums[m][idx[m]] += value;
            } else if (sign < 0) {
                sums[m][idx[m]] -= value;
            }
        }
        ++position;
    } while (next_index(idx, shape));

    for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t t = 0; t < shape[m]; ++t) {
            sums[m][t] = problem.is_constrained(m, t) ? sums[m][t] - problem.marginals[m][t] : 0.0;
        }
    }
    return sums;
}

}  // namespace sbridge
