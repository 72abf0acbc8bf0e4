#pragma once

#include <map>
#include <vector>

#include "h12/kernels.hpp"
#include "h12/norms.hpp"
#include "h12/shapes.hpp"

namespace h12 {

/// Padded line used to realize marginals for the density quadratures. The
/// length is set by the phi kernel's polynomial tail: |f_nu| must fall
/// below the 1e-8 boundary gate.
inline Grid density_line_grid() { return Grid(1, 4096.0, std::int64_t(1) << 20); }

namespace detail {

struct CenteredMarginal {
    std::vector<double> x;  // ascending, centered on 0
    std::vector<double> f;
    double h;
    double period;
};

inline CenteredMarginal centered_marginal(const KernelSpec& kernel, std::array<double, 2> nu,
                                          const Grid& line) {
    const SampledField m = marginal(kernel, nu, line);
    const std::int64_t n = line.resolution();
    CenteredMarginal out;
    out.h = line.spacing();
    out.period = line.period();
    out.x.resize(n);
    out.f.resize(n);
    // samples at coord i*h; reorder so x runs over [-L/2, L/2)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t src = (i + n / 2) % n;
        double x = line.coord(src);
        if (x >= out.period / 2.0) x -= out.period;
        out.x[i] = x;
        out.f[i] = m[src];
    }
    return out;
}

inline void require_mean_zero(const KernelSpec& kernel) {
    if (!kernel.mean_zero())
        throw h12_error("halfspace density requires a mean-zero kernel "
                        "(the Heaviside convolution does not decay otherwise)");
}

}  // namespace detail

/// F(nu) = -1/2 double-integral of f_nu(t) f_nu(s) |s-t| over the truncated
/// line, torus distance, evaluated exactly in O(N) by prefix sums.
inline double F_via_marginal(const KernelSpec& kernel, std::array<double, 2> nu,
                             const Grid& line = density_line_grid()) {
    detail::require_mean_zero(kernel);
    const auto m = detail::centered_marginal(kernel, nu, line);
    const std::int64_t n = static_cast<std::int64_t>(m.x.size());
    const double L = m.period;
    // prefix sums P_k = sum_{i<k} f_i, Q_k = sum_{i<k} f_i x_i
    std::vector<double> P(n + 1, 0.0), Q(n + 1, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        P[i + 1] = P[i] + m.f[i];
        Q[i + 1] = Q[i] + m.f[i] * m.x[i];
    }
    double acc = 0.0;  // sum over ordered pairs i<j of f_i f_j dist(x_i,x_j)
    std::int64_t k = 0;  // first index with x_j - x_k <= L/2
    for (std::int64_t j = 0; j < n; ++j) {
        while (m.x[j] - m.x[k] > L / 2.0) ++k;
        // near part, plain distance
        acc += m.f[j] * (m.x[j] * (P[j] - P[k]) - (Q[j] - Q[k]));
        // far part wraps: distance L - (x_j - x_i)
        acc += m.f[j] * ((L - m.x[j]) * P[k] + Q[k]);
    }
    return -0.5 * 2.0 * acc * m.h * m.h;
}

/// F(nu) = integral of |f_nu * 1_H|^2 by direct cumulative convolution with
/// the Heaviside profile on the padded line (trapezoid weights).
inline double F_via_halfspace(const KernelSpec& kernel, std::array<double, 2> nu,
                              const Grid& line = density_line_grid()) {
    detail::require_mean_zero(kernel);
    const auto m = detail::centered_marginal(kernel, nu, line);
    const std::int64_t n = static_cast<std::int64_t>(m.x.size());
    const double tail = std::max(std::fabs(m.f.front()), std::fabs(m.f.back()));
    if (tail > 1e-8)
        throw h12_error("F_via_halfspace: padding insufficient, profile tail " +
                        std::to_string(tail) + " at the boundary");
    // G(t) = int_t^inf f, tail half-weight at the evaluation point
    double suffix = 0.0;
    double acc = 0.0;
    for (std::int64_t i = n - 1; i >= 0; --i) {
        const double G = (suffix + 0.5 * m.f[i]) * m.h;
        acc += G * G;
        suffix += m.f[i];
    }
    return acc * m.h;
}

/// 1-D instance of F; the constant of the one-dimensional jump formula.
inline double c_f(const KernelSpec& kernel, const Grid& line = density_line_grid()) {
    if (kernel.dimension() != 1) throw h12_error("c_f: 1-D kernels only");
    return F_via_halfspace(kernel, {1.0, 0.0}, line);
}

/// Per-normal cache of F(nu); radial kernels collapse to one evaluation.
class DensityProfile {
public:
    explicit DensityProfile(KernelSpec kernel, Grid line = density_line_grid())
        : kernel_(std::move(kernel)), line_(line) {}

    double F(std::array<double, 2> nu) {
        if (kernel_.kind() != KernelKind::Custom) {
            if (!radial_) radial_ = F_via_marginal(kernel_, {1.0, 0.0}, line_);
            return *radial_;
        }
        const double angle = std::atan2(nu[1], nu[0]);
        const std::int64_t key = static_cast<std::int64_t>(std::llround(angle * 1e12));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double v = F_via_marginal(kernel_, nu, line_);
        cache_.emplace(key, v);
        return v;
    }

    const KernelSpec& kernel() const { return kernel_; }

private:
    KernelSpec kernel_;
    Grid line_;
    std::optional<double> radial_;
    std::map<std::int64_t, double> cache_;
};

/// Surface integral of F over the reduced boundary,
/// sum over boundary elements of weight * F(normal).
inline double boundary_integral(const ShapeSet& shape, const KernelSpec& kernel,
                                const Grid& line = density_line_grid()) {
    DensityProfile prof(kernel, line);
    double acc = 0.0;
    for (const auto& el : boundary_normals(shape)) acc += el.weight * prof.F(el.normal);
    return acc;
}

struct LipschitzCheck {
    double lhs = 0.0;
    double bound = 0.0;
    bool ok = false;
};

/// |F(nu) - F(nu')| <= 2 |nu - nu'| ||f||_L1 |||x| f||_L1, the moments taken
/// from the kernel's own dimension. Pass a precomputed MomentReport when
/// auditing many pairs.
inline LipschitzCheck lipschitz_check(const KernelSpec& kernel, std::array<double, 2> nu,
                                      std::array<double, 2> nu_prime,
                                      const MomentReport& mr,
                                      const Grid& line = density_line_grid()) {
    LipschitzCheck out;
    out.lhs = std::fabs(F_via_marginal(kernel, nu, line) -
                        F_via_marginal(kernel, nu_prime, line));
    const double dn = std::hypot(nu[0] - nu_prime[0], nu[1] - nu_prime[1]);
    out.bound = 2.0 * dn * mr.l1 * mr.abs_first_moment;
    out.ok = out.lhs <= out.bound * (1.0 + 1e-6) + 1e-12;
    return out;
}

inline LipschitzCheck lipschitz_check(const KernelSpec& kernel, std::array<double, 2> nu,
                                      std::array<double, 2> nu_prime,
                                      const Grid& moment_grid,
                                      const Grid& line = density_line_grid()) {
    return lipschitz_check(kernel, nu, nu_prime, moment_report(kernel, moment_grid), line);
}

}  // namespace h12
