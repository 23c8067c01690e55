#pragma once

#include <cstddef>
#include <vector>

namespace sbridge {

/// One mode update within a sweep. Sweeps are numbered from 1.
///
/// The residual norms are those of the mode's constraint immediately before
/// the update (the violation the update removes); `dual_value` is the dual
/// objective immediately after it.
struct TraceRow {
    std::size_t sweep = 0;
    std::size_t mode = 0;
    double residual_inf = 0.0;
    double residual_l2 = 0.0;
    double dual_value = 0.0;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

using ConvergenceTrace = std::vector<TraceRow>;

}  // namespace sbridge
