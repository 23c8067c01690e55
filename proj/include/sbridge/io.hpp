#pragma once

// JSON documents for problems, solutions and hypergraphs, and the CSV trace
// format. All indices are zero-based. Serialization is canonical: fixed field
// order, two-space indentation, shortest round-trip number formatting.

#include "sbridge/hypergraph.hpp"
#include "sbridge/problem.hpp"
#include "sbridge/solver.hpp"
#include "sbridge/trace.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sbridge {

inline constexpr std::string_view format_version = "1.0";

enum class Encoding { Dense, Sparse };

/// Option fields present in a document; absent ones keep library defaults.
struct OptionOverrides {
    std::optional<double> tolerance;
    std::optional<std::size_t> max_iterations;
    std::optional<double> overflow_guard;
    std::optional<bool> record_trace;

    bool empty() const noexcept { return !tolerance && !max_iterations && !overflow_guard && !record_trace; }
    void apply(SolveOptions& options) const;

    friend bool operator==(const OptionOverrides&, const OptionOverrides&) = default;
};

struct ProblemDocument {
    std::string version{format_version};
    Encoding encoding = Encoding::Dense;
    /// Options already include the overrides and the unconstrained lists.
    BridgeProblem problem;
    OptionOverrides overrides;
    /// Optional published posterior kept alongside a fixture.
    std::optional<DenseTensor> reference_posterior;
};

struct SolutionDocument {
    std::string version{format_version};
    Encoding encoding = Encoding::Dense;
    DenseTensor posterior;
    std::vector<std::vector<double>> factors;
    SolveStatus status = SolveStatus::MaxIterations;
    std::size_t iterations_used = 0;
    std::vector<double> final_residuals;
    std::optional<std::string> trace_path;
    /// Sparse encoding only: flat positions listed, in increasing order.
    std::vector<std::size_t> support;
};

struct HypergraphDocument {
    Hypergraph hypergraph;
    /// Present in uniformization output.
    std::optional<std::vector<std::size_t>> virtual_nodes;
};

ProblemDocument parse_problem_document(std::string_view text);
std::string serialize_problem_document(const ProblemDocument& doc);
ProblemDocument make_problem_document(const BridgeProblem& problem, Encoding encoding);

/// Sparse encoding lists the posterior on the prior's support only.
SolutionDocument make_solution_document(const BridgeSolution& solution, const BridgeProblem& problem,
                                        Encoding encoding, std::optional<std::string> trace_path = std::nullopt);
SolutionDocument parse_solution_document(std::string_view text);
std::string serialize_solution_document(const SolutionDocument& doc);

/// Posterior from either a solution document ("posterior") or a fixture
/// problem document ("reference_posterior"); sparse posteriors are expanded
/// on `shape`.
DenseTensor parse_posterior(std::string_view text, const Shape& shape);

HypergraphDocument parse_hypergraph_document(std::string_view text);
std::string serialize_hypergraph_document(const HypergraphDocument& doc);

inline constexpr std::string_view trace_csv_header = "sweep,mode,residual_inf,residual_l2,dual_value";

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
/// Throws DocumentError naming the offending line.
ConvergenceTrace read_trace_csv(std::istream& in);

/// Whole-file helpers; throw DocumentError naming the path on I/O failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace sbridge
