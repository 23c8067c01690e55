#include "sbridge/errors.hpp"
#include "sbridge/tensor.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sbridge;
using sbridge::test::matrix;
using sbridge::test::sign_matrix;

TEST_CASE("layout is row-major")
{
    Layout l(Shape{2, 3, 4});
    CHECK(l.size() == 24);
    CHECK(l.stride(0) == 12);
    CHECK(l.stride(2) == 1);
    const MultiIndex idx{1, 2, 3};
    CHECK(l.flat_index(idx) == 23);
    CHECK(l.unravel(23) == idx);
    CHECK(l.mode_index(23, 1) == 2);
    const MultiIndex bad{2, 0, 0};
    CHECK_THROWS_AS(l.flat_index(bad), ShapeError);
    const MultiIndex short_idx{1, 1};
    CHECK_THROWS_AS(l.flat_index(short_idx), ShapeError);
}

TEST_CASE("constructors reject malformed shapes")
{
    CHECK_THROWS_AS(DenseTensor(Shape{}), ShapeError);
    CHECK_THROWS_AS(DenseTensor(Shape{2, 0}), ShapeError);
    CHECK_THROWS_AS(DenseTensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(SignTemplate(Shape{2}, std::vector<std::int8_t>{1}), ShapeError);
}

TEST_CASE("template well-formedness")
{
    SignTemplate s(Shape{2, 2}, std::vector<std::int8_t>{1, 0, -1, 1});
    CHECK(s.well_formed());
    s[0] = 2;
    CHECK_FALSE(s.well_formed());
}

TEST_CASE("signed marginal of the reference synthetic posterior")
{
    const DenseTensor p = sbridge::test::synthetic_reference();
    const BridgeProblem prob = sbridge::test::synthetic_problem();
    const auto rows = signed_marginal(p, prob.templates[0], 0);
    const std::vector<double> expect{0.2, 0.3, 0.1, 0.4};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(rows[i] - expect[i]) <= 2e-4);
}

TEST_CASE("signed marginal small cases")
{
    const SignTemplate plus(Shape{2, 2}, 1);
    CHECK(signed_marginal(DenseTensor(Shape{2, 2}), plus, 0) == std::vector<double>{0, 0});
    CHECK(signed_marginal(DenseTensor(Shape{2, 2}, 1.0), plus, 1) == std::vector<double>{2, 2});
    const SignTemplate mixed = sign_matrix({{1, -1}, {0, 1}});
    CHECK(signed_marginal(matrix({{1, 2}, {3, 4}}), mixed, 0) == std::vector<double>{-1, 4});
    CHECK(signed_marginal(matrix({{1, 2}, {3, 4}}), mixed, 1) == std::vector<double>{1, 2});
    CHECK_THROWS_AS(signed_marginal(DenseTensor(Shape{2, 2}), plus, 2), ModeError);
    CHECK_THROWS_AS(signed_marginal(DenseTensor(Shape{2, 3}), plus, 0), ShapeError);
}

TEST_CASE("elementwise product")
{
    CHECK(elementwise_product(matrix({{1, 2}, {3, 4}}), matrix({{1, 0}, {0, 1}})) == matrix({{1, 0}, {0, 4}}));
    CHECK(elementwise_product(matrix({{2, 0}, {0, 3}}), matrix({{0.5, 1}, {1, 0.5}})) == matrix({{1, 0}, {0, 1.5}}));
    const DenseTensor a = matrix({{1.5, -2}, {0.25, 7}});
    CHECK(elementwise_product(a, DenseTensor(Shape{2, 2}, 1.0)) == a);
    CHECK_THROWS_AS(elementwise_product(a, DenseTensor(Shape{4})), ShapeError);
}

TEST_CASE("apply signs")
{
    CHECK(apply_signs(matrix({{1, 2}, {3, 4}}), sign_matrix({{1, -1}, {0, 1}})) == matrix({{1, -2}, {0, 4}}));
}

TEST_CASE("dense from sparse")
{
    const std::vector<SparseEntry> one{{{0, 1}, 1.0, {1, -1}}};
    const DenseEncoding enc = dense_from_sparse(Shape{2, 2}, one);
    CHECK(enc.prior == matrix({{0, 1}, {0, 0}}));
    CHECK(enc.templates[0] == sign_matrix({{0, 1}, {0, 0}}));
    CHECK(enc.templates[1] == sign_matrix({{0, -1}, {0, 0}}));

    const DenseEncoding empty = dense_from_sparse(Shape{2, 2}, std::vector<SparseEntry>{});
    CHECK(empty.prior == DenseTensor(Shape{2, 2}));
    CHECK(empty.templates.size() == 2);
    CHECK(empty.templates[1] == SignTemplate(Shape{2, 2}));

    const std::vector<SparseEntry> dup{{{0, 1}, 1.0, {1, 1}}, {{0, 1}, 2.0, {1, 1}}};
    CHECK_THROWS_AS(dense_from_sparse(Shape{2, 2}, dup), DuplicateEntryError);
    const std::vector<SparseEntry> out_of_range{{{2, 0}, 1.0, {1, 1}}};
    CHECK_THROWS_AS(dense_from_sparse(Shape{2, 2}, out_of_range), ShapeError);
    const std::vector<SparseEntry> zero{{{0, 0}, 0.0, {1, 1}}};
    CHECK_THROWS_AS(dense_from_sparse(Shape{2, 2}, zero), SparseFormatError);
    const std::vector<SparseEntry> arity{{{0, 0}, 1.0, {1}}};
    CHECK_THROWS_AS(dense_from_sparse(Shape{2, 2}, arity), SparseFormatError);
}

TEST_CASE("synthetic instance round-trips through the sparse encoding")
{
    const BridgeProblem prob = sbridge::test::synthetic_problem();
    const auto entries = sparse_from_dense(prob.prior, prob.templates);
    CHECK(entries.size() == 12);
    const DenseEncoding back = dense_from_sparse(prob.prior.shape(), entries);
    CHECK(back.prior == prob.prior);
    CHECK(back.templates == prob.templates);
    CHECK(sparse_from_dense(back.prior, back.templates) == entries);
}

TEST_CASE("signed marginal properties on random tensors")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Shape shape(2 + rng() % 2);
        for (auto& n : shape) n = 1 + rng() % 6;
        DenseTensor t1(shape), t2(shape);
        SignTemplate s(shape), plus(shape, 1);
        for (std::size_t i = 0; i < t1.size(); ++i) {
            t1[i] = u(rng);
            t2[i] = u(rng);
            s[i] = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
        }
        const double a = u(rng), b = u(rng);
        DenseTensor combo(shape);
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * t1[i] + b * t2[i];
        for (std::size_t m = 0; m < shape.size(); ++m) {
            const auto lhs = signed_marginal(combo, s, m);
            const auto m1 = signed_marginal(t1, s, m), m2 = signed_marginal(t2, s, m);
            for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - (a * m1[i] + b * m2[i])) <= 1e-12);

            std::vector<double> plain(shape[m], 0.0);
            for (std::size_t f = 0; f < t1.size(); ++f) plain[t1.layout().mode_index(f, m)] += t1[f];
            const auto signed_plain = signed_marginal(t1, plus, m);
            for (std::size_t i = 0; i < plain.size(); ++i) CHECK(std::abs(signed_plain[i] - plain[i]) <= 1e-12);
        }
    }
}

TEST_CASE("sparse round-trip on random canonical forms")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Shape shape{1 + rng() % 4, 1 + rng() % 4, 1 + rng() % 3};
        DenseTensor prior(shape);
        std::vector<SignTemplate> templates(3, SignTemplate(shape));
        for (std::size_t i = 0; i < prior.size(); ++i) {
            if (rng() % 2) continue;
            prior[i] = 0.1 + static_cast<double>(rng() % 100);
            for (auto& t : templates) t[i] = rng() % 2 ? 1 : -1;
        }
        const auto entries = sparse_from_dense(prior, templates);
        const DenseEncoding enc = dense_from_sparse(shape, entries);
        CHECK(enc.prior == prior);
        CHECK(enc.templates == templates);
    }
}
