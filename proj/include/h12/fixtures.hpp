#pragma once

#include "h12/scale_functionals.hpp"
#include "h12/shapes.hpp"

namespace h12::fixtures {

/// One unit down-jump at x = 0.55 L plus a wide smooth ramp carrying the
/// value back up; the ramp is absolutely continuous and drops out of the
/// r -> 0 limits.
inline SampledField single_unit_jump(const Grid& grid) {
    const double L = grid.period();
    std::vector<double> out(grid.size());
    for (std::int64_t i = 0; i < grid.resolution(); ++i) {
        const double x = (i + 0.5) * grid.spacing() / L;
        double v = smooth_step((x - 0.05) / 0.40);  // rise 0 -> 1 on [0.05, 0.45]
        if (x >= 0.55) v -= 1.0;                    // the jump under test
        out[i] = v;
    }
    return SampledField(grid, std::move(out));
}

/// Three jumps {+1, -2, +0.5} at {0.2, 0.45, 0.7} L with a smooth closure
/// ramp on [0.78, 0.98] L.
inline SampledField three_jumps(const Grid& grid) {
    PiecewiseConstant1D pc;
    pc.period = grid.period();
    const double L = grid.period();
    pc.breakpoints = {0.2 * L, 0.45 * L, 0.7 * L};
    pc.values = {0.0, 1.0, -1.0, -0.5};
    return rasterize_pc_compensated(pc, grid, 0.78 * L, 0.98 * L);
}

/// Continuous piecewise-linear triangle with total variation 2 (the same BV
/// norm as the unit-jump fixture) and no jumps.
inline SampledField triangle_no_jump(const Grid& grid) {
    const double L = grid.period();
    std::vector<double> out(grid.size());
    for (std::int64_t i = 0; i < grid.resolution(); ++i) {
        const double x = (i + 0.5) * grid.spacing() / L;
        const double d = std::fabs(x - 0.5);
        out[i] = d < 0.3 ? 1.0 - d / 0.3 : 0.0;
    }
    return SampledField(grid, std::move(out));
}

/// Disk of radius L/4, centered.
inline SampledField disk(const Grid& grid) {
    const double L = grid.period();
    return rasterize(ShapeSet(Ball{{0.5 * L, 0.5 * L}, 0.25 * L}), grid);
}

/// Checkerboard with cells of side L / 2^depth_pow; at depth_pow = log2(N)-2
/// the cells reach 4h (the infinite-perimeter proxy).
inline SampledField checkerboard(const Grid& grid, int cells_per_axis) {
    const std::int64_t n = grid.resolution();
    if (n % cells_per_axis != 0) throw h12_error("checkerboard: cells must divide N");
    const std::int64_t s = n / cells_per_axis;
    std::vector<double> out(grid.size());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            out[i * n + j] = static_cast<double>(((i / s) + (j / s)) % 2);
    return SampledField(grid, std::move(out));
}

/// 1-D comb alternating over cells of the given sample width.
inline SampledField comb_1d(const Grid& grid, std::int64_t cell_samples) {
    std::vector<double> out(grid.size());
    for (std::int64_t i = 0; i < grid.resolution(); ++i)
        out[i] = static_cast<double>((i / cell_samples) % 2);
    return SampledField(grid, std::move(out));
}

}  // namespace h12::fixtures
