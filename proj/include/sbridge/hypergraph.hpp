#pragma once

#include "sbridge/problem.hpp"
#include "sbridge/tensor.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace sbridge {

struct Hyperedge {
    std::vector<std::size_t> nodes;
    int sign = 1;

    friend bool operator==(const Hyperedge&, const Hyperedge&) = default;
};

/// Signed hypergraph on nodes 0..node_count-1. Hyperedges join at least two
/// distinct nodes; no two hyperedges share a node set.
struct Hypergraph {
    std::size_t node_count = 0;
    std::vector<Hyperedge> hyperedges;

    /// Throws InvalidHypergraphError describing the first broken invariant.
    void validate() const;
    /// Largest hyperedge cardinality, 0 when there are no hyperedges.
    std::size_t max_cardinality() const noexcept;
    bool is_uniform() const noexcept;

    friend bool operator==(const Hypergraph&, const Hypergraph&) = default;
};

struct UniformizationResult {
    Hypergraph hypergraph;
    /// Appended placeholder nodes, in increasing order.
    std::vector<std::size_t> virtual_node_ids;
    /// edge_map[i] is the position of original hyperedge i in `hypergraph`.
    std::vector<std::size_t> edge_map;
};

/// Pads every hyperedge to the maximum cardinality from a shared pool of
/// virtual nodes appended after the original ones. A hyperedge short by d
/// nodes receives the first d pool nodes; the pool size is the largest deficiency.
UniformizationResult uniformize(const Hypergraph& h);

/// Order-k symmetric sign tensor over node_count nodes: every permutation of
/// each hyperedge's node tuple carries the hyperedge's sign.
/// Throws UniformityError unless every hyperedge has exactly k nodes.
SignTemplate adjacency_tensor(const Hypergraph& h, std::size_t k);

enum class PriorRule {
    /// Prior is the absolute value of the template.
    UnsignedTemplate,
    /// Prior supplied by the caller on the uniformized shape.
    Custom,
};

enum class VirtualNodePolicy {
    /// Virtual nodes are added to every mode's unconstrained list.
    Dropped,
    /// Virtual nodes are constrained to `virtual_epsilon` in every mode.
    Pinned,
};

struct HypergraphProblemOptions {
    PriorRule prior_rule = PriorRule::UnsignedTemplate;
    std::optional<DenseTensor> custom_prior;
    /// Per-mode templates on the uniformized shape; the adjacency tensor when empty.
    std::vector<SignTemplate> templates;
    VirtualNodePolicy virtual_policy = VirtualNodePolicy::Dropped;
    double virtual_epsilon = 1e-9;
    SolveOptions solve;
};

struct HypergraphProblem {
    BridgeProblem problem;
    UniformizationResult uniformization;
};

/// Builds a bridge problem of order k_max from a (possibly non-uniform)
/// hypergraph. `marginals` holds one vector per mode over the original nodes.
///
/// Throws ShapeError for marginal count or length mismatches and ValidationError
/// when the assembled problem is not structurally valid.
HypergraphProblem problem_from_hypergraph(const Hypergraph& h, const std::vector<std::vector<double>>& marginals,
                                          const HypergraphProblemOptions& options = {});

}  // namespace sbridge
