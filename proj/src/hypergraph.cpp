#include "sbridge/hypergraph.hpp"

#include "sbridge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace sbridge {

void Hypergraph::validate() const
{
    if (node_count == 0) throw InvalidHypergraphError("node_count must be positive");
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t e = 0; e < hyperedges.size(); ++e) {
        const Hyperedge& edge = hyperedges[e];
        const std::string where = "hyperedge " + std::to_string(e);
        if (edge.sign != 1 && edge.sign != -1) throw InvalidHypergraphError(where + ": sign must be -1 or +1");
        if (edge.nodes.size() < 2) throw InvalidHypergraphError(where + ": needs at least two nodes");
        std::vector<std::size_t> sorted = edge.nodes;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvalidHypergraphError(where + ": repeats a node");
        }
        if (sorted.back() >= node_count) {
            throw InvalidHypergraphError(where + ": node " + std::to_string(sorted.back()) + " out of range");
        }
        if (!seen.insert(std::move(sorted)).second) {
            throw InvalidHypergraphError(where + ": duplicates an earlier hyperedge's node set");
        }
    }
}

std::size_t Hypergraph::max_cardinality() const noexcept
{
    std::size_t k = 0;
    for (const auto& e : hyperedges) k = std::max(k, e.nodes.size());
    return k;
}

bool Hypergraph::is_uniform() const noexcept
{
    const std::size_t k = max_cardinality();
    return std::all_of(hyperedges.begin(), hyperedges.end(),
                       [k](const Hyperedge& e) { return e.nodes.size() == k; });
}

UniformizationResult uniformize(const Hypergraph& h)
{
    h.validate();
    const std::size_t k_max = h.max_cardinality();
    std::size_t pool = 0;
    for (const auto& e : h.hyperedges) pool = std::max(pool, k_max - e.nodes.size());

    UniformizationResult out;
    out.hypergraph.node_count = h.node_count + pool;
    for (std::size_t v = 0; v < pool; ++v) out.virtual_node_ids.push_back(h.node_count + v);
    for (std::size_t e = 0; e < h.hyperedges.size(); ++e) {
        Hyperedge padded = h.hyperedges[e];
        const std::size_t deficiency = k_max - padded.nodes.size();
        for (std::size_t v = 0; v < deficiency; ++v) padded.nodes.push_back(out.virtual_node_ids[v]);
        out.edge_map.push_back(out.hypergraph.hyperedges.size());
        out.hypergraph.hyperedges.push_back(std::move(padded));
    }
    return out;
}

SignTemplate adjacency_tensor(const Hypergraph& h, std::size_t k)
{
    h.validate();
    if (k == 0) throw UniformityError("tensor order must be positive");
    for (std::size_t e = 0; e < h.hyperedges.size(); ++e) {
        if (h.hyperedges[e].nodes.size() != k) {
            throw UniformityError("hyperedge " + std::to_string(e) + " has " +
                                  std::to_string(h.hyperedges[e].nodes.size()) + " nodes, expected " +
                                  std::to_string(k));
        }
    }
    SignTemplate tensor(Shape(k, h.node_count));
    for (const auto& edge : h.hyperedges) {
        std::vector<std::size_t> perm = edge.nodes;
        std::sort(perm.begin(), perm.end());
        do {
            tensor.at(perm) = static_cast<std::int8_t>(edge.sign);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return tensor;
}

HypergraphProblem problem_from_hypergraph(const Hypergraph& h, const std::vector<std::vector<double>>& marginals,
                                          const HypergraphProblemOptions& options)
{
    HypergraphProblem out;
    out.uniformization = uniformize(h);
    const Hypergraph& uniform = out.uniformization.hypergraph;
    const std::size_t k = uniform.max_cardinality();
    if (k == 0) throw ShapeError("hypergraph has no hyperedges; the tensor order is undefined");
    const std::size_t n = uniform.node_count;

    if (marginals.size() != k) {
        throw ShapeError("expected " + std::to_string(k) + " marginal vectors, got " + std::to_string(marginals.size()));
    }
    for (std::size_t m = 0; m < k; ++m) {
        if (marginals[m].size() != h.node_count) {
            throw ShapeError("marginal " + std::to_string(m) + " has length " + std::to_string(marginals[m].size()) +
                             ", expected " + std::to_string(h.node_count));
        }
    }

    BridgeProblem& problem = out.problem;
    const Shape shape(k, n);
    if (options.templates.empty()) {
        problem.templates.assign(k, adjacency_tensor(uniform, k));
    } else {
        if (options.templates.size() != k) {
            throw ShapeError("expected " + std::to_string(k) + " templates, got " +
                             std::to_string(options.templates.size()));
        }
        for (const auto& t : options.templates) {
            if (t.shape() != shape) throw ShapeError("supplied template shape differs from the uniformized shape");
        }
        problem.templates = options.templates;
    }

    if (options.prior_rule == PriorRule::Custom) {
        if (!options.custom_prior) throw ShapeError("custom prior rule selected but no prior supplied");
        if (options.custom_prior->shape() != shape) throw ShapeError("custom prior shape differs from the uniformized shape");
        problem.prior = *options.custom_prior;
    } else {
        problem.prior = DenseTensor(shape);
        const SignTemplate& base = problem.templates.front();
        for (std::size_t i = 0; i < base.size(); ++i) problem.prior[i] = std::abs(static_cast<int>(base[i]));
    }

    problem.options = options.solve;
    problem.options.unconstrained.resize(k);
    for (std::size_t m = 0; m < k; ++m) {
        std::vector<double> marg = marginals[m];
        marg.resize(n, options.virtual_policy == VirtualNodePolicy::Pinned ? options.virtual_epsilon : 0.0);
        problem.marginals.push_back(std::move(marg));
        if (options.virtual_policy == VirtualNodePolicy::Dropped) {
            auto& dropped = problem.options.unconstrained[m];
            dropped.insert(dropped.end(), out.uniformization.virtual_node_ids.begin(),
                           out.uniformization.virtual_node_ids.end());
        }
    }
    require_valid(problem);
    return out;
}

}  // namespace sbridge
