// Command-line front end: solve, validate, uniformize, gen, rate.
//
// Exit codes for `solve`: 0 converged, 2 max iterations, 3 diverged, 1 bad
// input. Machine output goes to files or stdout; summaries go to stderr.

#include "sbridge/diagnostics.hpp"
#include "sbridge/errors.hpp"
#include "sbridge/hypergraph.hpp"
#include "sbridge/io.hpp"
#include "sbridge/oracle.hpp"
#include "sbridge/problem.hpp"
#include "sbridge/solver.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace sbridge;

constexpr int exit_ok = 0;
constexpr int exit_input = 1;
constexpr int exit_max_iterations = 2;
constexpr int exit_diverged = 3;

void emit(const std::optional<std::string>& path, const std::string& text)
{
    if (path) {
        write_text_file(*path, text);
    } else {
        std::cout << text;
    }
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct SolveArgs {
    std::string problem_path;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    std::optional<std::string> trace;
    std::optional<std::string> out;
    bool oracle = false;
};

int run_solve(const SolveArgs& args)
{
    ProblemDocument doc = parse_problem_document(read_text_file(args.problem_path));
    BridgeProblem& problem = doc.problem;
    if (args.tol) problem.options.tolerance = *args.tol;
    if (args.max_iter) problem.options.max_iterations = *args.max_iter;
    if (args.trace) problem.options.record_trace = true;

    const ValidationReport report = validate(problem);
    if (!report.ok()) {
        std::cerr << "invalid problem: " << report.summary() << "\n";
        return exit_input;
    }

    BridgeSolution sol;
    try {
        sol = solve_generalized(problem);
    } catch (const InfeasibleStructureError& e) {
        std::cerr << "infeasible structure: " << e.what() << "\n";
        return exit_input;
    } catch (const RootDomainError& e) {
        std::cerr << "infeasible structure: " << e.what() << "\n";
        return exit_input;
    }

    if (args.trace) {
        std::ofstream csv(*args.trace, std::ios::binary);
        if (!csv) throw DocumentError(*args.trace, "cannot open file for writing");
        write_trace_csv(csv, sol.trace.value_or(ConvergenceTrace{}));
    }
    emit(args.out, serialize_solution_document(make_solution_document(sol, problem, doc.encoding, args.trace)));

    double worst = 0.0;
    for (double r : sol.final_residuals) worst = std::isnan(r) ? r : std::max(worst, r);
    std::cerr << "status " << to_string(sol.status) << " after " << sol.iterations_used << " sweeps, max residual "
              << fmt(worst) << "\n";

    if (args.oracle) {
        try {
            const BridgeSolution ref = oracle_solve(problem);
            double gap = 0.0;
            for (std::size_t i = 0; i < ref.posterior.size(); ++i) {
                gap = std::max(gap, std::abs(ref.posterior[i] - sol.posterior[i]));
            }
            std::cerr << "oracle max entrywise disagreement " << fmt(gap) << " (" << ref.iterations_used
                      << " gradient steps)\n";
        } catch (const OracleFailed& e) {
            std::cerr << "oracle inconclusive: " << e.what() << "\n";
        } catch (const ShapeError& e) {
            std::cerr << "oracle skipped: " << e.what() << "\n";
        }
    }

    switch (sol.status) {
    case SolveStatus::Converged:
        return exit_ok;
    case SolveStatus::MaxIterations:
        return exit_max_iterations;
    case SolveStatus::Diverged:
        return exit_diverged;
    }
    return exit_input;
}

int run_validate(const std::string& problem_path, const std::string& posterior_path, double tol)
{
    const ProblemDocument doc = parse_problem_document(read_text_file(problem_path));
    const DenseTensor posterior = parse_posterior(read_text_file(posterior_path), doc.problem.prior.shape());
    const FixtureReport report = validate_fixture(posterior, doc.problem, tol);
    for (std::size_t m = 0; m < report.modes.size(); ++m) {
        const auto& mode = report.modes[m];
        std::cout << "mode " << m << " max_residual " << fmt(mode.max_residual);
        if (!mode.failing.empty()) {
            std::cout << " failing_indices";
            for (std::size_t t : mode.failing) std::cout << ' ' << t;
        }
        std::cout << "\n";
    }
    std::cout << (report.pass ? "pass" : "fail") << " at tolerance " << fmt(tol) << "\n";
    return report.pass ? exit_ok : exit_max_iterations;
}

int run_uniformize(const std::string& path, const std::optional<std::string>& out)
{
    const HypergraphDocument doc = parse_hypergraph_document(read_text_file(path));
    const UniformizationResult result = uniformize(doc.hypergraph);
    emit(out, serialize_hypergraph_document({result.hypergraph, result.virtual_node_ids}));
    std::cerr << result.virtual_node_ids.size() << " virtual node(s) appended\n";
    return exit_ok;
}

struct GenArgs {
    std::size_t order = 2;
    std::size_t dim = 4;
    double density = 1.0;
    double neg_frac = 0.0;
    std::uint64_t seed = 0;
    std::optional<std::string> out;
};

int run_gen(const GenArgs& args)
{
    GeneratorSpec spec;
    spec.shape.assign(args.order, args.dim);
    spec.density = args.density;
    spec.negative_fraction = {args.neg_frac};
    spec.seed = args.seed;
    const GeneratedProblem gen = generate_feasible(spec);
    emit(args.out, serialize_problem_document(make_problem_document(gen.problem, Encoding::Dense)));
    return exit_ok;
}

int run_rate(const std::string& path, std::size_t mode, std::size_t burn_in, const std::string& norm)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DocumentError(path, "cannot open file");
    const ConvergenceTrace trace = read_trace_csv(in);
    try {
        const RateEstimate est =
            estimate_rate(trace, mode, burn_in, norm == "l2" ? ResidualNorm::L2 : ResidualNorm::Inf);
        std::cout << "slope " << fmt(est.slope) << "\nintercept " << fmt(est.intercept) << "\nr_squared "
                  << fmt(est.r_squared) << "\nsamples " << est.samples << "\n";
    } catch (const RateUndefined& e) {
        std::cout << "rate undefined: " << e.what() << "\n";
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Signed-template Schroedinger bridge solver"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve a problem document");
    solve->add_option("problem", solve_args.problem_path, "Problem JSON")->required();
    solve->add_option("--tol", solve_args.tol, "Max-abs residual tolerance");
    solve->add_option("--max-iter", solve_args.max_iter, "Maximum sweeps");
    solve->add_option("--trace", solve_args.trace, "Write convergence trace CSV");
    solve->add_option("--out", solve_args.out, "Solution JSON (stdout if omitted)");
    solve->add_flag("--oracle", solve_args.oracle, "Cross-check against the gradient-ascent oracle");

    std::string val_problem, val_posterior;
    double val_tol = 1e-6;
    auto* val = app.add_subcommand("validate", "Check a posterior against a problem's marginals");
    val->add_option("problem", val_problem, "Problem JSON")->required();
    val->add_option("posterior", val_posterior, "Solution JSON or fixture with reference_posterior")->required();
    val->add_option("--tol", val_tol, "Residual tolerance")->capture_default_str();

    std::string uni_path;
    std::optional<std::string> uni_out;
    auto* uni = app.add_subcommand("uniformize", "Pad a hypergraph to uniform cardinality");
    uni->add_option("hypergraph", uni_path, "Hypergraph JSON")->required();
    uni->add_option("--out", uni_out, "Output JSON (stdout if omitted)");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a feasible random problem");
    gen->add_option("--order", gen_args.order, "Tensor order")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--dim", gen_args.dim, "Extent of every mode")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--density", gen_args.density, "Support density in (0,1]")->capture_default_str();
    gen->add_option("--neg-frac", gen_args.neg_frac, "Fraction of -1 template entries")->capture_default_str();
    gen->add_option("--seed", gen_args.seed, "Random seed")->capture_default_str();
    gen->add_option("--out", gen_args.out, "Output JSON (stdout if omitted)");

    std::string rate_path;
    std::size_t rate_mode = 0;
    std::size_t rate_burn_in = default_burn_in;
    std::string rate_norm = "inf";
    auto* rate = app.add_subcommand("rate", "Fit a linear rate to a convergence trace");
    rate->add_option("trace", rate_path, "Trace CSV")->required();
    rate->add_option("--mode", rate_mode, "Mode to fit")->capture_default_str();
    rate->add_option("--burn-in", rate_burn_in, "Sweeps skipped before fitting")->capture_default_str();
    rate->add_option("--norm", rate_norm, "Residual column: inf or l2")
        ->check(CLI::IsMember({"inf", "l2"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*solve) return run_solve(solve_args);
        if (*val) return run_validate(val_problem, val_posterior, val_tol);
        if (*uni) return run_uniformize(uni_path, uni_out);
        if (*gen) return run_gen(gen_args);
        if (*rate) return run_rate(rate_path, rate_mode, rate_burn_in, rate_norm);
    } catch (const sbridge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    }
    return exit_input;
}
