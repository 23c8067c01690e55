#pragma once

// Dense order-k arrays in row-major layout, sign templates over the same
// layout, and the signed mode marginal that every solver step is built on.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sbridge {

using Shape = std::vector<std::size_t>;
using MultiIndex = std::vector<std::size_t>;

/// Row-major index arithmetic for a fixed shape.
class Layout {
public:
    Layout() = default;
    /// Throws ShapeError for an empty shape or a zero extent.
    explicit Layout(Shape shape);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return size_; }
    std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
    std::size_t stride(std::size_t mode) const { return strides_.at(mode); }

    /// Index along `mode` of the element stored at `flat`.
    std::size_t mode_index(std::size_t flat, std::size_t mode) const noexcept
    {
        return (flat / strides_[mode]) % shape_[mode];
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const;
    MultiIndex unravel(std::size_t flat) const;

    friend bool operator==(const Layout& a, const Layout& b) { return a.shape_ == b.shape_; }

private:
    Shape shape_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape, double fill = 0.0);
    /// Throws ShapeError unless values.size() equals the element count of `shape`.
    DenseTensor(Shape shape, std::vector<double> values);

    const Layout& layout() const noexcept { return layout_; }
    const Shape& shape() const noexcept { return layout_.shape(); }
    std::size_t order() const noexcept { return layout_.order(); }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double operator[](std::size_t flat) const noexcept { return values_[flat]; }
    double& operator[](std::size_t flat) noexcept { return values_[flat]; }
    double at(std::span<const std::size_t> idx) const { return values_[layout_.flat_index(idx)]; }
    double& at(std::span<const std::size_t> idx) { return values_[layout_.flat_index(idx)]; }

    double sum() const noexcept;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Layout layout_;
    std::vector<double> values_;
};

/// Sign pattern over a tensor layout. Entries are expected in {-1, 0, +1};
/// out-of-range entries are stored as given so that problem validation can
/// report them instead of failing at construction.
class SignTemplate {
public:
    SignTemplate() = default;
    explicit SignTemplate(Shape shape, std::int8_t fill = 0);
    SignTemplate(Shape shape, std::vector<std::int8_t> signs);

    const Layout& layout() const noexcept { return layout_; }
    const Shape& shape() const noexcept { return layout_.shape(); }
    std::size_t order() const noexcept { return layout_.order(); }
    std::size_t size() const noexcept { return signs_.size(); }

    std::span<const std::int8_t> signs() const noexcept { return signs_; }
    std::span<std::int8_t> signs() noexcept { return signs_; }

    std::int8_t operator[](std::size_t flat) const noexcept { return signs_[flat]; }
    std::int8_t& operator[](std::size_t flat) noexcept { return signs_[flat]; }
    std::int8_t at(std::span<const std::size_t> idx) const { return signs_[layout_.flat_index(idx)]; }
    std::int8_t& at(std::span<const std::size_t> idx) { return signs_[layout_.flat_index(idx)]; }

    /// True when every entry is -1, 0 or +1.
    bool well_formed() const noexcept;

    friend bool operator==(const SignTemplate&, const SignTemplate&) = default;

private:
    Layout layout_;
    std::vector<std::int8_t> signs_;
};

/// One nonzero prior entry together with its sign in every mode's template.
struct SparseEntry {
    MultiIndex idx;
    double prior_value = 0.0;
    std::vector<std::int8_t> signs;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

struct DenseEncoding {
    DenseTensor prior;
    std::vector<SignTemplate> templates;
};

/// v[t] = sum over entries whose `mode` index is t of sign * value.
///
/// Throws ShapeError when the shapes differ and ModeError when `mode` is not
/// below the order.
std::vector<double> signed_marginal(const DenseTensor& t, const SignTemplate& s, std::size_t mode);

DenseTensor elementwise_product(const DenseTensor& a, const DenseTensor& b);

/// Entrywise sign * value, i.e. the signed weights implied by a template.
DenseTensor apply_signs(const DenseTensor& t, const SignTemplate& s);

/// Expands a sparse entry list into a dense prior and one template per mode.
/// Throws DuplicateEntryError, ShapeError (index out of bounds or wrong
/// index length) or SparseFormatError (prior <= 0, wrong sign count).
DenseEncoding dense_from_sparse(const Shape& shape, std::span<const SparseEntry> entries);

/// Canonical sparse form: every entry with a positive prior, in row-major order.
std::vector<SparseEntry> sparse_from_dense(const DenseTensor& prior,
                                           std::span<const SignTemplate> templates);

}  // namespace sbridge
