#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "h12/convolve.hpp"
#include "h12/norms.hpp"
#include "h12/shapes.hpp"

namespace h12 {

/// (scale, value) pairs with the extrapolated r->0 limit from the
/// least-squares model value(r) = a + b r^beta, beta in {1/2, 1} picked by
/// residual. Fewer than 4 scales: no extrapolation, last value flagged raw.
struct ScaleTrace {
    std::vector<std::pair<double, double>> entries;
    double limit_estimate = 0.0;
    double fit_residual = 0.0;
    double beta = 0.0;
    bool raw = false;
};

namespace detail {

inline void fit_trace(ScaleTrace& tr) {
    const std::size_t n = tr.entries.size();
    if (n < 4) {
        tr.raw = true;
        tr.limit_estimate = n ? tr.entries.back().second : 0.0;
        tr.fit_residual = 0.0;
        tr.beta = 0.0;
        return;
    }
    double best_res = std::numeric_limits<double>::infinity();
    for (double beta : {0.5, 1.0}) {
        // normal equations for [1, r^beta]
        double s11 = 0, s1x = 0, sxx = 0, s1y = 0, sxy = 0;
        for (auto& [r, v] : tr.entries) {
            const double x = std::pow(r, beta);
            s11 += 1.0; s1x += x; sxx += x * x; s1y += v; sxy += x * v;
        }
        const double det = s11 * sxx - s1x * s1x;
        const double a = (sxx * s1y - s1x * sxy) / det;
        const double b = (s11 * sxy - s1x * s1y) / det;
        double res = 0.0;
        for (auto& [r, v] : tr.entries) {
            const double e = v - (a + b * std::pow(r, beta));
            res += e * e;
        }
        res = std::sqrt(res);
        if (res < best_res) {
            best_res = res;
            tr.limit_estimate = a;
            tr.fit_residual = res;
            tr.beta = beta;
        }
    }
}

}  // namespace detail

/// |log eps|^{-1} ||gamma_eps * u||^2_{H^{1/2}}, eps an absolute length < 1.
inline double smoothed_h12_energy(const SpectralField& spec, double eps) {
    if (eps >= 1.0) throw h12_error("smoothed_h12_energy: |log eps| degenerate for eps >= 1");
    if (eps < 4.0 * spec.grid().spacing())
        throw under_resolved_error("smoothed_h12_energy: eps below 4h");
    return smoothed_h_half_sq(spec, eps) / std::fabs(std::log(eps));
}

inline double smoothed_h12_energy(const SampledField& u, double eps) {
    return smoothed_h12_energy(transform(u), eps);
}

/// Per-scale terms of the dyadic decomposition of the smoothed energy:
/// term_k = (eps 2^k)^{-1} ||phi_{eps 2^k} * u||^2_{L2}, k = 1..ceil(log2(1/eps)).
/// Partial sums telescope exactly against gaussian-smoothed H^{1/2} norms;
/// `remainder` records |sum - ||gamma_eps*u||^2_{H^{1/2}}| / ||u||^2_{L2}.
struct DyadicDecomposition {
    std::vector<double> terms;
    double sum = 0.0;
    double smoothed_h_half = 0.0;
    double remainder_over_l2 = 0.0;
};

inline DyadicDecomposition dyadic_decomposition(const SpectralField& spec, double eps) {
    if (eps >= 1.0 || eps <= 0.0) throw h12_error("dyadic_decomposition: need 0 < eps < 1");
    DyadicDecomposition out;
    const KernelSpec phi = KernelSpec::phi(spec.grid().dimension());
    const int kmax = static_cast<int>(std::ceil(std::log2(1.0 / eps)));
    for (int k = 1; k <= kmax; ++k) {
        const double r = eps * std::pow(2.0, k);
        out.terms.push_back(convolved_l2_sq(spec, phi, r) / r);
        out.sum += out.terms.back();
    }
    out.smoothed_h_half = smoothed_h_half_sq(spec, eps);
    const double l2 = l2_sq(spec);
    out.remainder_over_l2 = l2 > 0.0 ? std::fabs(out.sum - out.smoothed_h_half) / l2 : 0.0;
    return out;
}

inline DyadicDecomposition dyadic_decomposition(const SampledField& u, double eps) {
    return dyadic_decomposition(transform(u), eps);
}

/// r^{-1} ||f_r * u||^2_{L2}.
inline double scale_localized_l2(const SpectralField& spec, const KernelSpec& kernel, double r) {
    if (r < 4.0 * spec.grid().spacing())
        throw under_resolved_error("scale_localized_l2: r below soft floor 4h");
    return convolved_l2_sq(spec, kernel, r) / r;
}

inline double scale_localized_l2(const SampledField& u, const KernelSpec& kernel, double r) {
    return scale_localized_l2(transform(u), kernel, r);
}

/// Windowed variant, L^2 restricted to an axis-aligned box [lo,hi) per axis.
inline double scale_localized_l2_windowed(const SampledField& u, const KernelSpec& kernel,
                                          double r, std::array<double, 2> lo,
                                          std::array<double, 2> hi) {
    const SampledField c = convolve(u, kernel, r);
    const Grid& g = u.grid();
    const std::int64_t n = g.resolution();
    double acc = 0.0;
    if (g.dimension() == 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            const double x = (i + 0.5) * g.spacing();
            if (x >= lo[0] && x < hi[0]) acc += c[i] * c[i];
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            const double x = (i + 0.5) * g.spacing();
            if (x < lo[0] || x >= hi[0]) continue;
            for (std::int64_t j = 0; j < n; ++j) {
                const double y = (j + 0.5) * g.spacing();
                if (y >= lo[1] && y < hi[1]) acc += c.at(i, j) * c.at(i, j);
            }
        }
    }
    return acc * std::pow(g.spacing(), g.dimension()) / r;
}

enum class ScanFunctional { ScaleLocalizedL2, SmoothedH12Energy };

/// Evaluate a functional over a strictly decreasing scale schedule and
/// extrapolate the r->0 limit.
inline ScaleTrace scale_scan(const SpectralField& spec, ScanFunctional which,
                             const KernelSpec& kernel, const std::vector<double>& schedule) {
    ScaleTrace tr;
    double prev = std::numeric_limits<double>::infinity();
    for (double r : schedule) {
        if (r >= prev) throw h12_error("scale_scan: schedule must be strictly decreasing");
        prev = r;
        const double v = which == ScanFunctional::ScaleLocalizedL2
                             ? scale_localized_l2(spec, kernel, r)
                             : smoothed_h12_energy(spec, r);
        tr.entries.emplace_back(r, v);
    }
    detail::fit_trace(tr);
    return tr;
}

inline ScaleTrace scale_scan(const SampledField& u, ScanFunctional which,
                             const KernelSpec& kernel, const std::vector<double>& schedule) {
    return scale_scan(transform(u), which, kernel, schedule);
}

inline std::vector<double> dyadic_schedule(double r0, int count) {
    std::vector<double> out;
    for (int j = 0; j < count; ++j) out.push_back(r0 * std::pow(2.0, -j));
    return out;
}

/// Piecewise-constant function on the circle: value_j on [x_j, x_{j+1}),
/// value_0 on [0, x_1) and again after the last breakpoint if it wraps.
struct PiecewiseConstant1D {
    double period = 1.0;
    std::vector<double> breakpoints;  // sorted, inside (0, period)
    std::vector<double> values;       // size breakpoints.size() + 1; values[0] on [0, x_1)

    double value_at(double x) const {
        std::size_t k = 0;
        while (k < breakpoints.size() && x >= breakpoints[k]) ++k;
        return values[k];
    }
    /// Jumps at the interior breakpoints (the wrap jump values[0]-values.back()
    /// is the periodic closure and is not listed here).
    std::vector<double> jumps() const {
        std::vector<double> out;
        for (std::size_t k = 0; k < breakpoints.size(); ++k)
            out.push_back(values[k + 1] - values[k]);
        return out;
    }
    double closure_jump() const { return values.front() - values.back(); }
};

/// c_f * sum of squared jumps.
inline double jump_functional_1d(const PiecewiseConstant1D& pc, double c_f) {
    if (!(c_f > 0.0)) throw h12_error("jump_functional_1d: c_f must be positive");
    double acc = 0.0;
    for (double j : pc.jumps()) acc += j * j;
    return c_f * acc;
}

inline SampledField rasterize_pc(const PiecewiseConstant1D& pc, const Grid& grid) {
    if (grid.dimension() != 1) throw h12_error("rasterize_pc: need 1-D grid");
    std::vector<double> out(grid.size());
    for (std::int64_t i = 0; i < grid.resolution(); ++i)
        out[i] = pc.value_at((i + 0.5) * grid.spacing());
    return SampledField(grid, std::move(out));
}

/// Raster of a piecewise-constant function plus a wide C-infinity ramp on
/// [ramp_lo, ramp_hi] that returns the value to values[0], so the torus
/// field carries exactly the listed jumps and an absolutely continuous
/// part that does not contribute to the r->0 limits.
inline SampledField rasterize_pc_compensated(const PiecewiseConstant1D& pc, const Grid& grid,
                                             double ramp_lo, double ramp_hi) {
    if (grid.dimension() != 1) throw h12_error("rasterize_pc_compensated: need 1-D grid");
    if (!pc.breakpoints.empty() && ramp_lo <= pc.breakpoints.back())
        throw h12_error("rasterize_pc_compensated: ramp must sit after the last breakpoint");
    const double mismatch = pc.values.front() - pc.values.back();
    std::vector<double> out(grid.size());
    for (std::int64_t i = 0; i < grid.resolution(); ++i) {
        const double x = (i + 0.5) * grid.spacing();
        double v = pc.value_at(x);
        if (x > ramp_lo)
            v += mismatch * smooth_step((x - ramp_lo) / (ramp_hi - ramp_lo));
        out[i] = v;
    }
    return SampledField(grid, std::move(out));
}

/// Cartesian-product energy inequality at one smoothing scale:
/// lhs = ||gamma_eps * 1_{ExE}||^2_{H^{1/2}} on the 2-D grid,
/// rhs = 2 * ||gamma_eps * 1_E||^2_{H^{1/2}} * ||gamma_eps * 1_E||^2_{L2}.
struct ProductEnergyCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double rhs_simple = 0.0;  // 2 * 1-D smoothed H^{1/2} norm, using |E| < L
    bool ok = false;
};

inline ProductEnergyCheck product_energy_check(const Intervals& e, double eps,
                                               const Grid& grid2d) {
    double m = 0.0;
    for (auto& [a, b] : e.parts) m += b - a;
    if (!(m < grid2d.period()))
        throw h12_error("product_energy_check: need |E| < L");
    Grid line(1, grid2d.period(), grid2d.resolution());
    const SpectralField s1 = transform(rasterize(ShapeSet(e), line));
    const SpectralField s2 = transform(cartesian_square(e, grid2d));
    ProductEnergyCheck out;
    out.lhs = smoothed_h_half_sq(s2, eps);
    const double h1 = smoothed_h_half_sq(s1, eps);
    const double l2 = detail::weighted_plancherel_sum(s1, [&](double a) {
        const double t = eps * a;
        return std::exp(-t * t);
    });
    out.rhs = 2.0 * h1 * l2;
    out.rhs_simple = 2.0 * h1;
    out.ok = out.lhs <= out.rhs * (1.0 + 1e-6);
    return out;
}

}  // namespace h12
