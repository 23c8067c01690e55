#include "sbridge/diagnostics.hpp"

#include "sbridge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sbridge {

std::vector<double> mode_residual(const DenseTensor& posterior, const BridgeProblem& problem, std::size_t mode)
{
    if (mode >= problem.templates.size() || mode >= problem.marginals.size()) {
        throw ModeError("mode " + std::to_string(mode) + " has no template or marginal");
    }
    std::vector<double> r = signed_marginal(posterior, problem.templates[mode], mode);
    const auto& target = problem.marginals[mode];
    if (target.size() != r.size()) {
        throw ShapeError("marginal " + std::to_string(mode) + " length differs from posterior extent");
    }
    for (std::size_t t = 0; t < r.size(); ++t) {
        r[t] = problem.is_constrained(mode, t) ? r[t] - target[t] : 0.0;
    }
    return r;
}

std::vector<std::vector<double>> residuals(const DenseTensor& posterior, const BridgeProblem& problem)
{
    if (posterior.shape() != problem.prior.shape()) {
        throw ShapeError("posterior shape differs from problem shape");
    }
    std::vector<std::vector<double>> out;
    out.reserve(problem.order());
    for (std::size_t m = 0; m < problem.order(); ++m) out.push_back(mode_residual(posterior, problem, m));
    return out;
}

double max_abs(const std::vector<double>& v) noexcept
{
    double best = 0.0;
    for (double x : v) {
        if (std::isnan(x)) return x;
        best = std::max(best, std::abs(x));
    }
    return best;
}

double l2_norm(const std::vector<double>& v) noexcept
{
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

RateEstimate estimate_rate(const ConvergenceTrace& trace, std::size_t mode, std::size_t burn_in, ResidualNorm norm)
{
    std::vector<double> xs, ys;
    for (const TraceRow& row : trace) {
        if (row.mode != mode || row.sweep <= burn_in) continue;
        const double r = norm == ResidualNorm::Inf ? row.residual_inf : row.residual_l2;
        if (r == 0.0) {
            throw RateUndefined("residual reaches zero at sweep " + std::to_string(row.sweep) +
                                "; the run converged exactly");
        }
        xs.push_back(static_cast<double>(row.sweep));
        ys.push_back(std::log(r));
    }
    if (xs.size() < 3) {
        throw ShapeError("rate fit for mode " + std::to_string(mode) + " needs at least 3 rows after burn-in, got " +
                         std::to_string(xs.size()));
    }

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw ShapeError("rate fit needs rows from at least two distinct sweeps");

    RateEstimate est;
    est.slope = sxy / sxx;
    est.intercept = my - est.slope * mx;
    est.burn_in = burn_in;
    est.samples = xs.size();
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (est.intercept + est.slope * xs[i]);
        ss_res += e * e;
    }
    // A flat series is fit exactly by the flat line.
    est.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return est;
}

FixtureReport validate_fixture(const DenseTensor& posterior, const BridgeProblem& problem, double tolerance)
{
    FixtureReport report;
    for (auto& r : residuals(posterior, problem)) {
        FixtureModeReport mode;
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (std::abs(r[t]) > tolerance || !std::isfinite(r[t])) mode.failing.push_back(t);
        }
        mode.max_residual = max_abs(r);
        mode.residual = std::move(r);
        report.pass = report.pass && mode.failing.empty();
        report.modes.push_back(std::move(mode));
    }
    return report;
}

}  // namespace sbridge
