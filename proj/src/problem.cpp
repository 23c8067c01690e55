#include "sbridge/problem.hpp"

#include "sbridge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace sbridge {

namespace {

std::string idx_string(const MultiIndex& idx)
{
    std::string out = "(";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(idx[i]);
    }
    return out + ")";
}

// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

bool BridgeProblem::is_constrained(std::size_t mode, std::size_t index) const
{
    if (mode >= options.unconstrained.size()) return true;
    const auto& dropped = options.unconstrained[mode];
    return std::find(dropped.begin(), dropped.end(), index) == dropped.end();
}

bool BridgeProblem::is_active(std::size_t flat) const
{
    if (!(prior[flat] > 0.0)) return false;
    return std::all_of(templates.begin(), templates.end(),
                       [flat](const SignTemplate& t) { return t[flat] != 0; });
}

bool ValidationReport::has(ViolationKind kind) const noexcept
{
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const
{
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out << "; ";
        out << violations[i].message;
    }
    return out.str();
}

ValidationReport validate(const BridgeProblem& problem)
{
    ValidationReport report;
    auto add = [&report](ViolationKind kind, std::string message) {
        report.violations.push_back({kind, std::move(message)});
    };

    const DenseTensor& prior = problem.prior;
    const std::size_t k = prior.order();
    if (k == 0) {
        add(ViolationKind::Shape, "prior is empty");
        return report;
    }

    if (problem.templates.size() != k) {
        add(ViolationKind::Shape, "expected " + std::to_string(k) + " templates, got " +
                                      std::to_string(problem.templates.size()));
    }
    if (problem.marginals.size() != k) {
        add(ViolationKind::Shape, "expected " + std::to_string(k) + " marginals, got " +
                                      std::to_string(problem.marginals.size()));
    }
    for (std::size_t m = 0; m < problem.templates.size(); ++m) {
        if (problem.templates[m].shape() != prior.shape()) {
            add(ViolationKind::Shape, "template " + std::to_string(m) + " shape differs from prior");
        } else if (!problem.templates[m].well_formed()) {
            add(ViolationKind::TemplateDomain,
                "template " + std::to_string(m) + " has an entry outside {-1,0,1}");
        }
    }
    for (std::size_t m = 0; m < std::min(k, problem.marginals.size()); ++m) {
        const auto& marg = problem.marginals[m];
        if (marg.size() != prior.shape()[m]) {
            add(ViolationKind::Shape, "marginal " + std::to_string(m) + " has length " +
                                          std::to_string(marg.size()) + ", expected " +
                                          std::to_string(prior.shape()[m]));
        }
        if (!std::all_of(marg.begin(), marg.end(), [](double v) { return std::isfinite(v); })) {
            add(ViolationKind::NonFinite, "marginal " + std::to_string(m) + " has a non-finite value");
        }
    }

    const SolveOptions& opt = problem.options;
    if (!(opt.tolerance > 0.0)) add(ViolationKind::Options, "tolerance must be positive");
    if (opt.max_iterations < 1) add(ViolationKind::Options, "max_iterations must be at least 1");
    if (!(opt.overflow_guard > 1.0)) add(ViolationKind::Options, "overflow_guard must exceed 1");
    if (opt.unconstrained.size() > k) {
        add(ViolationKind::Options, "unconstrained lists given for more modes than the order");
    }
    for (std::size_t m = 0; m < std::min(k, opt.unconstrained.size()); ++m) {
        for (std::size_t t : opt.unconstrained[m]) {
            if (t >= prior.shape()[m]) {
                add(ViolationKind::Options, "unconstrained index " + std::to_string(t) +
                                                " out of range for mode " + std::to_string(m));
            }
        }
    }

    // Everything below indexes templates and marginals entrywise.
    if (!report.ok()) return report;

    // Per mode and index: does the active support reach it with +1 / -1 signs?
    std::vector<std::vector<bool>> has_pos(k), has_neg(k);
    for (std::size_t m = 0; m < k; ++m) {
        has_pos[m].assign(prior.shape()[m], false);
        has_neg[m].assign(prior.shape()[m], false);
    }

    for (std::size_t flat = 0; flat < prior.size(); ++flat) {
        const double q = prior[flat];
        if (!std::isfinite(q)) {
            add(ViolationKind::NonFinite, "prior entry " + idx_string(prior.layout().unravel(flat)) +
                                              " is not finite");
            continue;
        }
        if (q < 0.0) {
            add(ViolationKind::NegativePrior,
                "prior entry " + idx_string(prior.layout().unravel(flat)) + " is negative");
            continue;
        }
        if (q == 0.0) continue;
        std::size_t nonzero = 0;
        for (const auto& t : problem.templates) nonzero += t[flat] != 0;
        if (nonzero != 0 && nonzero != k) {
            add(ViolationKind::MixedActivity,
                "entry " + idx_string(prior.layout().unravel(flat)) +
                    " is partially active: some templates are zero where others are not");
            continue;
        }
        if (nonzero == 0) continue;
        for (std::size_t m = 0; m < k; ++m) {
            const std::size_t t = prior.layout().mode_index(flat, m);
            (problem.templates[m][flat] > 0 ? has_pos : has_neg)[m][t] = true;
        }
    }

    // A one-signed index needs a target of that sign for the scaling root to exist.
    for (std::size_t m = 0; m < k; ++m) {
        for (std::size_t t = 0; t < prior.shape()[m]; ++t) {
            if (!problem.is_constrained(m, t)) continue;
            const double c = problem.marginals[m][t];
            if (has_pos[m][t] && !has_neg[m][t] && !(c > 0.0)) {
                add(ViolationKind::MarginalSign,
                    "marginal " + std::to_string(m) + "[" + std::to_string(t) +
                        "] must be positive: template has no negative support there");
            } else if (has_neg[m][t] && !has_pos[m][t] && !(c < 0.0)) {
                add(ViolationKind::MarginalSign,
                    "marginal " + std::to_string(m) + "[" + std::to_string(t) +
                        "] must be negative: template has no positive support there");
            }
        }
    }
    return report;
}

void require_valid(const BridgeProblem& problem)
{
    const ValidationReport report = validate(problem);
    if (!report.ok()) throw ValidationError("invalid problem: " + report.summary());
}

SignPartition partition(const DenseTensor& prior, const std::vector<SignTemplate>& templates)
{
    if (templates.size() != 2 || prior.order() != 2) {
        throw ModeError("four-way sign partition needs an order-2 prior with two templates");
    }
    const SignTemplate& first = templates[0];
    const SignTemplate& second = templates[1];
    if (first.shape() != prior.shape() || second.shape() != prior.shape()) {
        throw ShapeError("partition: template shape differs from prior");
    }
    SignPartition part{DenseTensor(prior.shape()), DenseTensor(prior.shape()),
                       DenseTensor(prior.shape()), DenseTensor(prior.shape())};
    for (std::size_t flat = 0; flat < prior.size(); ++flat) {
        const double q = prior[flat];
        if (!(q > 0.0) || first[flat] == 0 || second[flat] == 0) continue;
        if (first[flat] > 0) {
            (second[flat] > 0 ? part.q_pp : part.q_pm)[flat] = q;
        } else {
            (second[flat] > 0 ? part.q_mp : part.q_mm)[flat] = q;
        }
    }
    return part;
}

std::vector<ModeSignMask> mode_sign_masks(const DenseTensor& prior, const std::vector<SignTemplate>& templates)
{
    std::vector<ModeSignMask> masks(templates.size());
    for (auto& mask : masks) {
        mask.positive.assign(prior.size(), false);
        mask.negative.assign(prior.size(), false);
    }
    for (const auto& t : templates) {
        if (t.shape() != prior.shape()) throw ShapeError("mode_sign_masks: template shape differs from prior");
    }
    for (std::size_t flat = 0; flat < prior.size(); ++flat) {
        if (!(prior[flat] > 0.0)) continue;
        const bool active = std::all_of(templates.begin(), templates.end(),
                                        [flat](const SignTemplate& t) { return t[flat] != 0; });
        if (!active) continue;
        for (std::size_t m = 0; m < templates.size(); ++m) {
            (templates[m][flat] > 0 ? masks[m].positive : masks[m].negative)[flat] = true;
        }
    }
    return masks;
}

GeneratedProblem generate_feasible(const GeneratorSpec& spec)
{
    if (spec.shape.empty()) throw GenerationError("shape must be nonempty");
    if (!(spec.density > 0.0 && spec.density <= 1.0)) throw GenerationError("density must lie in (0, 1]");
    const std::size_t k = spec.shape.size();
    std::vector<double> neg = spec.negative_fraction;
    if (neg.size() == 1) neg.assign(k, neg.front());
    if (neg.size() != k) {
        throw GenerationError("negative_fraction needs 1 or " + std::to_string(k) + " values");
    }
    for (double f : neg) {
        if (!(f >= 0.0 && f <= 1.0)) throw GenerationError("negative_fraction must lie in [0, 1]");
    }

    const Layout layout = [&] {
        try {
            return Layout(spec.shape);
        } catch (const ShapeError& e) {
            throw GenerationError(e.what());
        }
    }();

    constexpr int max_attempts = 64;
    std::mt19937_64 rng(spec.seed);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<bool> support(layout.size());
        bool any = false;
        for (std::size_t flat = 0; flat < layout.size(); ++flat) {
            support[flat] = spec.density >= 1.0 || uniform01(rng) < spec.density;
            any = any || support[flat];
        }
        if (!any) continue;

        GeneratedProblem out;
        out.witness = DenseTensor(spec.shape);
        out.problem.prior = DenseTensor(spec.shape);
        out.problem.templates.assign(k, SignTemplate(spec.shape));
        for (std::size_t flat = 0; flat < layout.size(); ++flat) {
            if (!support[flat]) continue;
            const double w = 0.5 + uniform01(rng);
            out.witness[flat] = w;
            out.problem.prior[flat] = w * std::exp(2.0 * uniform01(rng) - 1.0);
            for (std::size_t m = 0; m < k; ++m) {
                out.problem.templates[m][flat] = uniform01(rng) < neg[m] ? -1 : 1;
            }
        }
        out.problem.marginals.reserve(k);
        for (std::size_t m = 0; m < k; ++m) {
            out.problem.marginals.push_back(signed_marginal(out.witness, out.problem.templates[m], m));
        }
        return out;
    }
    throw GenerationError("empty support in " + std::to_string(max_attempts) + " draws; raise density");
}

}  // namespace sbridge
