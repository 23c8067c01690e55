#pragma once

#include "sbridge/problem.hpp"
#include "sbridge/tensor.hpp"
#include "sbridge/trace.hpp"

#include <cstddef>
#include <vector>

namespace sbridge {

/// Per mode, signed_marginal(posterior, template, mode) - marginal, with
/// unconstrained indices masked to zero.
std::vector<std::vector<double>> residuals(const DenseTensor& posterior, const BridgeProblem& problem);

/// Residual vector of a single mode, masked like `residuals`.
std::vector<double> mode_residual(const DenseTensor& posterior, const BridgeProblem& problem, std::size_t mode);

double max_abs(const std::vector<double>& v) noexcept;
double l2_norm(const std::vector<double>& v) noexcept;

enum class ResidualNorm { Inf, L2 };

struct RateEstimate {
    /// Per-sweep change of the natural log of the residual.
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t burn_in = 0;
    std::size_t samples = 0;
};

constexpr std::size_t default_burn_in = 5;

/// Least-squares line through (sweep, log residual) for rows of `mode` with
/// sweep > burn_in.
///
/// Throws ShapeError when fewer than three rows remain and RateUndefined
/// when a residual in the window is exactly zero.
RateEstimate estimate_rate(const ConvergenceTrace& trace, std::size_t mode,
                           std::size_t burn_in = default_burn_in, ResidualNorm norm = ResidualNorm::Inf);

struct FixtureModeReport {
    std::vector<double> residual;
    /// Constrained indices whose |residual| exceeds the tolerance.
    std::vector<std::size_t> failing;
    double max_residual = 0.0;
};

struct FixtureReport {
    std::vector<FixtureModeReport> modes;
    bool pass = true;
};

/// Checks every constrained marginal of `posterior` against `problem` at `tolerance`.
FixtureReport validate_fixture(const DenseTensor& posterior, const BridgeProblem& problem, double tolerance);

}  // namespace sbridge
