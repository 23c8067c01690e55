#include "sbridge/diagnostics.hpp"
#include "sbridge/errors.hpp"
#include "sbridge/solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace sbridge;

namespace {

ConvergenceTrace geometric_trace(std::size_t sweeps, double base, double scale = 1.0)
{
    ConvergenceTrace t;
    for (std::size_t s = 1; s <= sweeps; ++s) {
        const double r = scale * std::pow(base, -static_cast<double>(s));
        t.push_back({s, 0, r, r, 0.0});
        t.push_back({s, 1, 2 * r, 3 * r, 0.0});
    }
    return t;
}

}  // namespace

TEST_CASE("residuals of the reference synthetic posterior")
{
    const auto r = residuals(sbridge::test::synthetic_reference(), sbridge::test::synthetic_problem());
    CHECK(max_abs(r[0]) <= 1e-3);
    CHECK(max_abs(r[1]) <= 1e-3);
}

TEST_CASE("zero posterior against zero marginals")
{
    BridgeProblem p;
    p.prior = DenseTensor(Shape{2, 3});
    p.templates = {SignTemplate(Shape{2, 3}), SignTemplate(Shape{2, 3})};
    p.marginals = {{0, 0}, {0, 0, 0}};
    for (const auto& r : residuals(DenseTensor(Shape{2, 3}), p)) CHECK(max_abs(r) == 0.0);
    CHECK(validate_fixture(DenseTensor(Shape{2, 3}), p, 0.0).pass);
}

TEST_CASE("reference ecological posterior fails exactly on the first three columns")
{
    const ProblemDocument doc = sbridge::test::load_fixture("eco_10.json");
    REQUIRE(doc.reference_posterior);
    const auto r = residuals(*doc.reference_posterior, doc.problem);
    CHECK(max_abs(r[0]) <= 1e-3);
    for (std::size_t j = 3; j < 10; ++j) CHECK(std::abs(r[1][j]) <= 1e-3);

    const FixtureReport rep = validate_fixture(*doc.reference_posterior, doc.problem, 1e-3);
    CHECK_FALSE(rep.pass);
    CHECK(rep.modes[0].failing.empty());
    CHECK(rep.modes[1].failing == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("reference synthetic posterior passes the fixture check")
{
    const ProblemDocument doc = sbridge::test::load_fixture("synthetic_4x4.json");
    REQUIRE(doc.reference_posterior);
    CHECK(validate_fixture(*doc.reference_posterior, doc.problem, 1e-3).pass);
    CHECK_FALSE(validate_fixture(*doc.reference_posterior, doc.problem, 1e-6).pass);
}

TEST_CASE("norm helpers")
{
    CHECK(max_abs({1.0, -3.0, 2.0}) == 3.0);
    CHECK(l2_norm({3.0, 4.0}) == 5.0);
    CHECK(std::isnan(max_abs({1.0, std::numeric_limits<double>::quiet_NaN()})));
    CHECK(max_abs({}) == 0.0);
}

TEST_CASE("rate of an exact geometric trace")
{
    const ConvergenceTrace t = geometric_trace(30, 10.0);
    const RateEstimate e = estimate_rate(t, 0);
    CHECK(std::abs(e.slope + std::log(10.0)) <= 1e-12);
    CHECK(std::abs(e.r_squared - 1.0) <= 1e-12);
    CHECK(e.samples == 25);
    CHECK(e.burn_in == 5);
    const RateEstimate l2 = estimate_rate(t, 1, 0, ResidualNorm::L2);
    CHECK(std::abs(l2.slope + std::log(10.0)) <= 1e-12);
    CHECK(std::abs(l2.intercept - std::log(3.0)) <= 1e-12);
}

TEST_CASE("rate of a constant trace")
{
    ConvergenceTrace t;
    for (std::size_t s = 1; s <= 10; ++s) t.push_back({s, 0, 0.5, 0.5, 0.0});
    const RateEstimate e = estimate_rate(t, 0, 0);
    CHECK(e.slope == 0.0);
}

TEST_CASE("rate slope is invariant to residual rescaling")
{
    const RateEstimate a = estimate_rate(geometric_trace(20, 3.0), 0);
    const RateEstimate b = estimate_rate(geometric_trace(20, 3.0, 1e4), 0);
    CHECK(std::abs(a.slope - b.slope) <= 1e-12);
    CHECK(std::abs(b.intercept - a.intercept - std::log(1e4)) <= 1e-10);
}

TEST_CASE("rate errors")
{
    ConvergenceTrace t = geometric_trace(10, 2.0);
    t[14].residual_inf = 0.0;
    CHECK_THROWS_AS(estimate_rate(t, 0), RateUndefined);
    CHECK_THROWS_AS(estimate_rate(geometric_trace(7, 2.0), 0), ShapeError);
    CHECK_THROWS_AS(estimate_rate(geometric_trace(30, 2.0), 4), ShapeError);
}

TEST_CASE("order-3 random instance converges linearly")
{
    BridgeProblem p = generate_feasible({Shape{10, 10, 10}, 0.5, {0.3}, 2024}).problem;
    p.options.record_trace = true;
    p.options.tolerance = 1e-13;
    const BridgeSolution s = solve_generalized(p);
    REQUIRE(s.trace);
    for (std::size_t m = 0; m < 3; ++m) {
        const RateEstimate e = estimate_rate(*s.trace, m, default_burn_in, ResidualNorm::L2);
        CHECK(e.slope < 0.0);
        CHECK(e.r_squared > 0.95);
    }
}
