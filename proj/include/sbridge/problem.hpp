#pragma once

#include "sbridge/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sbridge {

struct SolveOptions {
    /// Max-abs marginal residual accepted at termination.
    double tolerance = 1e-9;
    /// Full sweeps over all modes.
    std::size_t max_iterations = 10000;
    /// Factors must stay within [1/overflow_guard, overflow_guard].
    double overflow_guard = 1e150;
    bool record_trace = false;
    /// Per mode, the indices whose marginal constraint is dropped.
    std::vector<std::vector<std::size_t>> unconstrained;
};

/// Prior, one sign template and one marginal per mode, and solve options.
///
/// Entry e is active when prior[e] > 0 and every template is nonzero there.
/// Entries with a positive prior and all-zero templates are structurally
/// excluded; the posterior is forced to zero on them.
struct BridgeProblem {
    DenseTensor prior;
    std::vector<SignTemplate> templates;
    std::vector<std::vector<double>> marginals;
    SolveOptions options;

    std::size_t order() const noexcept { return prior.order(); }
    bool is_constrained(std::size_t mode, std::size_t index) const;
    bool is_active(std::size_t flat) const;
};

enum class ViolationKind {
    Shape,
    TemplateDomain,
    NegativePrior,
    NonFinite,
    MixedActivity,
    MarginalSign,
    Options,
};

struct Violation {
    ViolationKind kind;
    std::string message;
};

/// Structural well-formedness only. An empty report is not a feasibility certificate.
struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(ViolationKind kind) const noexcept;
    std::string summary() const;
};

ValidationReport validate(const BridgeProblem& problem);

/// Throws ValidationError carrying the report summary unless `problem` is valid.
void require_valid(const BridgeProblem& problem);

/// Two-template split of the prior by sign pattern on the active support.
struct SignPartition {
    DenseTensor q_pp;  // first template > 0, second > 0
    DenseTensor q_pm;  // first > 0, second < 0
    DenseTensor q_mp;  // first < 0, second > 0
    DenseTensor q_mm;  // first < 0, second < 0
};

/// Requires exactly two templates; throws ModeError otherwise.
SignPartition partition(const DenseTensor& prior, const std::vector<SignTemplate>& templates);

/// Membership of the active support in the positive and negative part of one template.
struct ModeSignMask {
    std::vector<bool> positive;
    std::vector<bool> negative;
};

/// One mask pair per template, for any order.
std::vector<ModeSignMask> mode_sign_masks(const DenseTensor& prior,
                                          const std::vector<SignTemplate>& templates);

struct GeneratorSpec {
    Shape shape;
    double density = 1.0;
    /// One value per mode, or a single value applied to every mode.
    std::vector<double> negative_fraction{0.0};
    std::uint64_t seed = 0;
};

struct GeneratedProblem {
    BridgeProblem problem;
    /// Positive tensor on the support that satisfies every marginal.
    DenseTensor witness;
};

/// Random instance that is feasible by construction: marginals are the signed
/// marginals of a hidden positive witness, and the prior is a perturbation of
/// that witness on the same support.
GeneratedProblem generate_feasible(const GeneratorSpec& spec);

}  // namespace sbridge
