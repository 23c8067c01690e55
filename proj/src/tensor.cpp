#include "sbridge/tensor.hpp"

#include "sbridge/errors.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace sbridge {

namespace {

std::string shape_string(const Shape& shape)
{
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

void require_same_shape(const Shape& a, const Shape& b, const char* what)
{
    if (a != b) {
        throw ShapeError(std::string(what) + ": shape " + shape_string(a) + " does not match " +
                         shape_string(b));
    }
}

}  // namespace

Layout::Layout(Shape shape) : shape_(std::move(shape))
{
    if (shape_.empty()) throw ShapeError("tensor order must be at least 1");
    strides_.assign(shape_.size(), 1);
    size_ = 1;
    for (std::size_t m = shape_.size(); m-- > 0;) {
        if (shape_[m] == 0) throw ShapeError("shape " + shape_string(shape_) + " has a zero extent");
        strides_[m] = size_;
        size_ *= shape_[m];
    }
}

std::size_t Layout::flat_index(std::span<const std::size_t> idx) const
{
    if (idx.size() != shape_.size()) {
        throw ShapeError("index has " + std::to_string(idx.size()) + " components, tensor order is " +
                         std::to_string(shape_.size()));
    }
    std::size_t flat = 0;
    for (std::size_t m = 0; m < idx.size(); ++m) {
        if (idx[m] >= shape_[m]) {
            throw ShapeError("index " + std::to_string(idx[m]) + " out of bounds for mode " +
                             std::to_string(m) + " of extent " + std::to_string(shape_[m]));
        }
        flat += idx[m] * strides_[m];
    }
    return flat;
}

MultiIndex Layout::unravel(std::size_t flat) const
{
    MultiIndex idx(shape_.size());
    for (std::size_t m = 0; m < shape_.size(); ++m) idx[m] = mode_index(flat, m);
    return idx;
}

DenseTensor::DenseTensor(Shape shape, double fill) : layout_(std::move(shape))
{
    values_.assign(layout_.size(), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : layout_(std::move(shape)), values_(std::move(values))
{
    if (values_.size() != layout_.size()) {
        throw ShapeError("tensor of shape " + shape_string(layout_.shape()) + " needs " +
                         std::to_string(layout_.size()) + " values, got " +
                         std::to_string(values_.size()));
    }
}

double DenseTensor::sum() const noexcept
{
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

SignTemplate::SignTemplate(Shape shape, std::int8_t fill) : layout_(std::move(shape))
{
    signs_.assign(layout_.size(), fill);
}

SignTemplate::SignTemplate(Shape shape, std::vector<std::int8_t> signs)
    : layout_(std::move(shape)), signs_(std::move(signs))
{
    if (signs_.size() != layout_.size()) {
        throw ShapeError("template of shape " + shape_string(layout_.shape()) + " needs " +
                         std::to_string(layout_.size()) + " signs, got " +
                         std::to_string(signs_.size()));
    }
}

bool SignTemplate::well_formed() const noexcept
{
    return std::all_of(signs_.begin(), signs_.end(), [](std::int8_t s) { return s >= -1 && s <= 1; });
}

std::vector<double> signed_marginal(const DenseTensor& t, const SignTemplate& s, std::size_t mode)
{
    require_same_shape(t.shape(), s.shape(), "signed_marginal");
    if (mode >= t.order()) {
        throw ModeError("mode " + std::to_string(mode) + " out of range for order " +
                        std::to_string(t.order()));
    }
    const Layout& layout = t.layout();
    std::vector<double> out(layout.extent(mode), 0.0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        const std::int8_t sign = s[flat];
        if (sign == 0) continue;
        out[layout.mode_index(flat, mode)] += sign * t[flat];
    }
    return out;
}

DenseTensor elementwise_product(const DenseTensor& a, const DenseTensor& b)
{
    require_same_shape(a.shape(), b.shape(), "elementwise_product");
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

DenseTensor apply_signs(const DenseTensor& t, const SignTemplate& s)
{
    require_same_shape(t.shape(), s.shape(), "apply_signs");
    DenseTensor out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = s[i] * t[i];
    return out;
}

DenseEncoding dense_from_sparse(const Shape& shape, std::span<const SparseEntry> entries)
{
    DenseEncoding enc{DenseTensor(shape), {}};
    const std::size_t k = shape.size();
    enc.templates.assign(k, SignTemplate(shape));

    std::set<std::size_t> seen;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const SparseEntry& entry = entries[e];
        const std::string where = "entry " + std::to_string(e);
        const std::size_t flat = enc.prior.layout().flat_index(entry.idx);
        if (!seen.insert(flat).second) {
            throw DuplicateEntryError(where + " repeats an index already present");
        }
        if (!(entry.prior_value > 0.0)) {
            throw SparseFormatError(where + " has non-positive prior value; omit zero entries");
        }
        if (entry.signs.size() != k) {
            throw SparseFormatError(where + " carries " + std::to_string(entry.signs.size()) +
                                    " signs, expected " + std::to_string(k));
        }
        enc.prior[flat] = entry.prior_value;
        for (std::size_t m = 0; m < k; ++m) enc.templates[m][flat] = entry.signs[m];
    }
    return enc;
}

std::vector<SparseEntry> sparse_from_dense(const DenseTensor& prior, std::span<const SignTemplate> templates)
{
    for (const auto& tpl : templates) require_same_shape(prior.shape(), tpl.shape(), "sparse_from_dense");
    std::vector<SparseEntry> out;
    for (std::size_t flat = 0; flat < prior.size(); ++flat) {
        if (!(prior[flat] > 0.0)) continue;
        SparseEntry entry{prior.layout().unravel(flat), prior[flat], {}};
        entry.signs.reserve(templates.size());
        for (const auto& tpl : templates) entry.signs.push_back(tpl[flat]);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace sbridge
