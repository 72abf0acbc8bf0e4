#pragma once

#include <algorithm>
#include <cmath>

#include "h12/fft.hpp"
#include "h12/grid.hpp"

namespace h12 {

struct NormReport {
    double l1 = 0.0;
    double l2_sq = 0.0;
    double linf = 0.0;
    double h_half_sq = 0.0;
};

namespace detail {

/// Sum of w(|xi_k|) * |c_k|^2 over all frequencies, times (2pi)^{-d} (dxi)^d.
/// This is the Plancherel weight convention fixed for the whole project.
template <class Weight>
double weighted_plancherel_sum(const SpectralField& spec, Weight&& w) {
    const Grid& g = spec.grid();
    const auto& c = spec.coefficients();
    const std::int64_t n = g.resolution();
    double acc = 0.0;
    if (g.dimension() == 1) {
        for (std::int64_t i = 0; i < n; ++i)
            acc += w(std::fabs(g.frequency(i))) * std::norm(c[i]);
    } else {
        std::vector<double> f(n);
        for (std::int64_t i = 0; i < n; ++i) f[i] = g.frequency(i);
        for (std::int64_t i = 0; i < n; ++i) {
            const double fi2 = f[i] * f[i];
            const std::complex<double>* row = c.data() + i * n;
            for (std::int64_t j = 0; j < n; ++j)
                acc += w(std::sqrt(fi2 + f[j] * f[j])) * std::norm(row[j]);
        }
    }
    const int d = g.dimension();
    return acc * std::pow(g.freq_step() / (2.0 * M_PI), d);
}

}  // namespace detail

inline double l2_sq(const SampledField& u) {
    double acc = 0.0;
    for (double v : u.samples()) acc += v * v;
    return acc * std::pow(u.grid().spacing(), u.grid().dimension());
}

inline double l2_sq(const SpectralField& spec) {
    return detail::weighted_plancherel_sum(spec, [](double) { return 1.0; });
}

/// ||u||^2_{H^{1/2}} = (2pi)^{-d} sum |xi| |u_hat|^2 (dxi)^d.
inline double h_half_sq(const SpectralField& spec) {
    return detail::weighted_plancherel_sum(spec, [](double a) { return a; });
}

inline NormReport norms(const SampledField& u) {
    NormReport r;
    for (double v : u.samples()) {
        r.l1 += std::fabs(v);
        r.l2_sq += v * v;
        r.linf = std::max(r.linf, std::fabs(v));
    }
    const double cell = std::pow(u.grid().spacing(), u.grid().dimension());
    r.l1 *= cell;
    r.l2_sq *= cell;
    r.h_half_sq = h_half_sq(transform(u));
    return r;
}

/// Discrete periodic total variation, sum |u_{i+1} - u_i|; exact for
/// piecewise-constant grid-aligned data.
inline double bv_seminorm_1d(const SampledField& u) {
    if (u.grid().dimension() != 1)
        throw h12_error("bv_seminorm_1d: only 1-D fields (2-D sets go through exact shape perimeter)");
    const auto& s = u.samples();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) acc += std::fabs(s[i + 1] - s[i]);
    acc += std::fabs(s.front() - s.back());
    return acc;
}

}  // namespace h12
