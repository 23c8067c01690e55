#include "sbridge/errors.hpp"
#include "sbridge/problem.hpp"
#include "sbridge/tensor.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace sbridge;
using sbridge::test::matrix;
using sbridge::test::sign_matrix;

TEST_CASE("synthetic instance validates")
{
    const ValidationReport r = validate(sbridge::test::synthetic_problem());
    CHECK_MESSAGE(r.ok(), r.summary());
    CHECK_NOTHROW(require_valid(sbridge::test::synthetic_problem()));
}

TEST_CASE("validation catches structural problems")
{
    SUBCASE("template domain")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.templates[0][1] = 2;
        CHECK(validate(p).has(ViolationKind::TemplateDomain));
        CHECK_THROWS_AS(require_valid(p), ValidationError);
    }
    SUBCASE("mixed activity")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.templates[0][1] = 0;
        CHECK(validate(p).has(ViolationKind::MixedActivity));
    }
    SUBCASE("negative prior")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.prior[1] = -1.0;
        CHECK(validate(p).has(ViolationKind::NegativePrior));
    }
    SUBCASE("non-finite values")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.marginals[1][2] = std::nan("");
        CHECK(validate(p).has(ViolationKind::NonFinite));
    }
    SUBCASE("shape mismatch")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.marginals[0].pop_back();
        CHECK(validate(p).has(ViolationKind::Shape));
        BridgeProblem q = sbridge::test::synthetic_problem();
        q.templates.pop_back();
        CHECK(validate(q).has(ViolationKind::Shape));
    }
    SUBCASE("marginal sign where the template has one sign only")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.marginals[0][2] = -0.1;
        CHECK(validate(p).has(ViolationKind::MarginalSign));
        p.marginals[0][2] = 0.0;
        CHECK(validate(p).has(ViolationKind::MarginalSign));
    }
    SUBCASE("mixed-sign index accepts any marginal")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.marginals[0][0] = -5.0;
        CHECK(validate(p).ok());
    }
    SUBCASE("unconstrained index skips the sign rule")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.marginals[0][2] = -0.1;
        p.options.unconstrained = {{2}, {}};
        CHECK(validate(p).ok());
        CHECK_FALSE(p.is_constrained(0, 2));
        CHECK(p.is_constrained(1, 2));
        p.options.unconstrained = {{7}, {}};
        CHECK(validate(p).has(ViolationKind::Options));
    }
    SUBCASE("options")
    {
        BridgeProblem p = sbridge::test::synthetic_problem();
        p.options.tolerance = 0.0;
        CHECK(validate(p).has(ViolationKind::Options));
    }
}

TEST_CASE("partition of the synthetic instance")
{
    const BridgeProblem p = sbridge::test::synthetic_problem();
    const SignPartition s = partition(p.prior, p.templates);
    CHECK(s.q_pm == matrix({{0, 0, 1, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}}));
    CHECK(s.q_mp == matrix({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}));
    CHECK(s.q_mm == DenseTensor(Shape{4, 4}));
    CHECK(s.q_pp == matrix({{0, 0, 0, 1}, {0, 0, 1, 1}, {0, 1, 0, 1}, {1, 1, 1, 0}}));
}

TEST_CASE("partition of sign-definite templates")
{
    const DenseTensor q = matrix({{1, 2}, {3, 4}});
    const SignTemplate plus(Shape{2, 2}, 1);
    const SignPartition s = partition(q, {plus, plus});
    CHECK(s.q_pp == q);
    CHECK(s.q_pm == DenseTensor(Shape{2, 2}));
    CHECK(s.q_mp == DenseTensor(Shape{2, 2}));
    CHECK(s.q_mm == DenseTensor(Shape{2, 2}));
    CHECK_THROWS_AS(partition(DenseTensor(Shape{2, 2, 2}), std::vector<SignTemplate>(3, SignTemplate(Shape{2, 2, 2}))),
                    ModeError);
}

TEST_CASE("partition identity and mask disjointness on generated instances")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = sbridge::test::fuzz_instance(seed, {2, 2, 1, 6, 0.6});
        const BridgeProblem& p = g.problem;
        const SignPartition s = partition(p.prior, p.templates);
        for (std::size_t i = 0; i < p.prior.size(); ++i) {
            CHECK(s.q_pp[i] + s.q_pm[i] + s.q_mp[i] + s.q_mm[i] == p.prior[i]);
        }
        const auto masks = mode_sign_masks(p.prior, p.templates);
        for (const auto& m : masks) {
            for (std::size_t i = 0; i < p.prior.size(); ++i) {
                CHECK_FALSE((m.positive[i] && m.negative[i]));
                CHECK((m.positive[i] || m.negative[i]) == (p.prior[i] > 0.0));
            }
        }
    }
}

TEST_CASE("generator is deterministic and sign-definite at zero negative fraction")
{
    GeneratorSpec spec{Shape{2, 2}, 1.0, {0.0}, 42};
    const GeneratedProblem a = generate_feasible(spec);
    const GeneratedProblem b = generate_feasible(spec);
    CHECK(a.problem.prior == b.problem.prior);
    CHECK(a.problem.marginals == b.problem.marginals);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.problem.templates[0][i] == 1);
        CHECK(a.problem.templates[1][i] == 1);
    }
    const DenseTensor& w = a.witness;
    CHECK(a.problem.marginals[0][0] == w[0] + w[1]);
    CHECK(a.problem.marginals[1][1] == w[1] + w[3]);
}

TEST_CASE("generator parameter errors")
{
    CHECK_THROWS_AS(generate_feasible({Shape{}, 1.0, {0.0}, 0}), GenerationError);
    CHECK_THROWS_AS(generate_feasible({Shape{2, 2}, 0.0, {0.0}, 0}), GenerationError);
    CHECK_THROWS_AS(generate_feasible({Shape{2, 2}, 1.0, {1.5}, 0}), GenerationError);
    CHECK_THROWS_AS(generate_feasible({Shape{2, 2}, 1.0, {0.1, 0.2, 0.3}, 0}), GenerationError);
}

TEST_CASE("generated problems always validate and the witness is feasible")
{
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto g = sbridge::test::fuzz_instance(seed, {1, 3, 1, 5, 1.0});
        const ValidationReport r = validate(g.problem);
        REQUIRE_MESSAGE(r.ok(), "seed ", seed, ": ", r.summary());
        for (std::size_t m = 0; m < g.problem.order(); ++m) {
            const auto got = signed_marginal(g.witness, g.problem.templates[m], m);
            const double n = static_cast<double>(g.witness.size());
            for (std::size_t t = 0; t < got.size(); ++t) {
                CHECK(std::abs(got[t] - g.problem.marginals[m][t]) <=
                      1e-12 * n * std::max(1.0, std::abs(g.problem.marginals[m][t])));
            }
        }
    }
}
