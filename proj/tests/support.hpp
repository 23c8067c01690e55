#pragma once

#include "sbridge/io.hpp"
#include "sbridge/problem.hpp"
#include "sbridge/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sbridge::test {

inline std::string fixture_path(const std::string& name)
{
    return std::string(SBRIDGE_FIXTURE_DIR) + "/" + name;
}

inline ProblemDocument load_fixture(const std::string& name)
{
    return parse_problem_document(read_text_file(fixture_path(name)));
}

inline DenseTensor matrix(const std::vector<std::vector<double>>& rows)
{
    DenseTensor t(Shape{rows.size(), rows.front().size()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) t[i * rows[i].size() + j] = rows[i][j];
    }
    return t;
}

inline SignTemplate sign_matrix(const std::vector<std::vector<int>>& rows)
{
    SignTemplate t(Shape{rows.size(), rows.front().size()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) t[i * rows[i].size() + j] = static_cast<std::int8_t>(rows[i][j]);
    }
    return t;
}

inline BridgeProblem synthetic_problem()
{
    BridgeProblem p;
    p.prior = matrix({{0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}});
    p.templates = {sign_matrix({{0, -1, 1, 1}, {-1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}}),
                   sign_matrix({{0, 1, -1, 1}, {1, 0, 1, 1}, {-1, 1, 0, 1}, {1, 1, 1, 0}})};
    p.marginals = {{0.2, 0.3, 0.1, 0.4}, {0.1, 0.1, 0.4, 0.4}};
    return p;
}

inline DenseTensor synthetic_reference()
{
    return matrix({{0, .0766, .1221, .1546},
                   {.1269, 0, .1989, .2280},
                   {.0815, .0011, 0, .0174},
                   {.0546, .0223, .3231, 0}});
}

struct FuzzRange {
    std::size_t min_order = 2;
    std::size_t max_order = 3;
    std::size_t min_dim = 1;
    std::size_t max_dim = 6;
    double max_negative = 0.5;
};

/// Random feasible instance; mode extents may differ.
inline GeneratedProblem fuzz_instance(std::uint64_t seed, const FuzzRange& range = {})
{
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    };
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    GeneratorSpec spec;
    spec.shape.resize(pick(range.min_order, range.max_order));
    for (auto& n : spec.shape) n = pick(range.min_dim, range.max_dim);
    spec.density = 0.4 + 0.6 * unit();
    spec.negative_fraction.clear();
    for (std::size_t m = 0; m < spec.shape.size(); ++m) spec.negative_fraction.push_back(range.max_negative * unit());
    spec.seed = seed;
    return generate_feasible(spec);
}

}  // namespace sbridge::test
