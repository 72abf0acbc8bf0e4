#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>

#include "h12/fft.hpp"
#include "h12/grid.hpp"

namespace h12 {

/// C-infinity step: 0 for t<=0, 1 for t>=1, strictly increasing between,
/// flat to all orders at both ends. S(t) + S(1-t) = 1.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double za = std::exp(-1.0 / t);
    const double zb = std::exp(-1.0 / (1.0 - t));
    return za / (za + zb);
}

/// Transition used by the band-limited kernel and the construction ramps:
/// 0 for y<=1/2, 1 for y>=1.
inline double smooth_sigma(double y) { return smooth_step(2.0 * (y - 0.5)); }

enum class KernelKind { Gaussian, PhiBandpass, PsiBandlimited, Custom };

/// Analytic kernel described by its Fourier multiplier; scaled kernels f_r
/// act through the multiplier at r*xi.
class KernelSpec {
public:
    using MultiplierFn = std::function<double(std::array<double, 2>)>;

    static KernelSpec gaussian(int dimension) { return KernelSpec(KernelKind::Gaussian, dimension); }
    static KernelSpec phi(int dimension) { return KernelSpec(KernelKind::PhiBandpass, dimension); }
    static KernelSpec psi(int dimension) { return KernelSpec(KernelKind::PsiBandlimited, dimension); }

    /// Escape hatch for tests: an even multiplier given explicitly.
    static KernelSpec custom(int dimension, MultiplierFn fn) {
        KernelSpec k(KernelKind::Custom, dimension);
        k.custom_ = std::make_shared<const MultiplierFn>(std::move(fn));
        return k;
    }

    KernelKind kind() const { return kind_; }
    int dimension() const { return dim_; }

    bool mean_zero() const {
        return std::fabs(multiplier({0.0, 0.0})) < 1e-12;
    }

    /// Multiplier value at a frequency vector (second component ignored in 1-D).
    double multiplier(std::array<double, 2> xi) const {
        switch (kind_) {
            case KernelKind::Custom:
                return (*custom_)(xi);
            default: {
                const double a = dim_ == 1 ? std::fabs(xi[0]) : std::hypot(xi[0], xi[1]);
                return radial(a);
            }
        }
    }

    /// Radial profile for the built-in kernels, |xi| -> value.
    double radial(double a) const {
        a = std::fabs(a);
        switch (kind_) {
            case KernelKind::Gaussian:
                return std::exp(-0.5 * a * a);
            case KernelKind::PhiBandpass: {
                // |phi_hat|^2 = |xi| (e^{-|xi|^2} - e^{-4|xi|^2}), nonnegative root.
                const double q = a * (std::exp(-a * a) - std::exp(-4.0 * a * a));
                return std::sqrt(std::max(q, 0.0));
            }
            case KernelKind::PsiBandlimited:
                if (a <= 0.5) return 1.0;
                if (a >= 1.0) return 0.0;
                return 1.0 - smooth_step(2.0 * a - 1.0);
            case KernelKind::Custom:
                return (*custom_)({a, 0.0});
        }
        return 0.0;
    }

private:
    KernelSpec(KernelKind k, int d) : kind_(k), dim_(d) {
        if (d != 1 && d != 2) throw h12_error("KernelSpec: dimension must be 1 or 2");
    }
    KernelKind kind_;
    int dim_;
    std::shared_ptr<const MultiplierFn> custom_;
};

/// Real-space samples: inverse transform of the multiplier on the grid's
/// frequencies (the periodization of the kernel).
inline SampledField space_samples(const KernelSpec& kernel, const Grid& grid) {
    if (grid.resolution() < 256) throw h12_error("space_samples: need N >= 256");
    if (grid.dimension() != kernel.dimension())
        throw h12_error("space_samples: grid/kernel dimension mismatch");
    const std::int64_t n = grid.resolution();
    std::vector<std::complex<double>> coeff(grid.size());
    if (grid.dimension() == 1) {
        for (std::int64_t i = 0; i < n; ++i)
            coeff[i] = kernel.multiplier({grid.frequency(i), 0.0});
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < n; ++j)
                coeff[i * n + j] = kernel.multiplier({grid.frequency(i), grid.frequency(j)});
    }
    return inverse(SpectralField(grid, std::move(coeff)));
}

struct MomentReport {
    double mass = 0.0;
    double abs_first_moment = 0.0;
    double l1 = 0.0;
};

/// Mass, torus-distance first absolute moment and L1 norm of the kernel's
/// real-space samples.
inline MomentReport moment_report(const KernelSpec& kernel, const Grid& grid) {
    const SampledField f = space_samples(kernel, grid);
    const std::int64_t n = grid.resolution();
    const double L = grid.period();
    const double cell = std::pow(grid.spacing(), grid.dimension());
    MomentReport r;
    auto axis_dist = [&](std::int64_t i) {
        const double x = grid.coord(i);
        return std::min(x, L - x);
    };
    if (grid.dimension() == 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            const double v = f[i];
            r.mass += v;
            r.l1 += std::fabs(v);
            r.abs_first_moment += axis_dist(i) * std::fabs(v);
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            const double dx = axis_dist(i);
            for (std::int64_t j = 0; j < n; ++j) {
                const double v = f.at(i, j);
                r.mass += v;
                r.l1 += std::fabs(v);
                r.abs_first_moment += std::hypot(dx, axis_dist(j)) * std::fabs(v);
            }
        }
    }
    r.mass *= cell;
    r.l1 *= cell;
    r.abs_first_moment *= cell;
    return r;
}

/// Plane-integral marginal f_nu via the projection-slice identity: the 1-D
/// transform of f_nu is the restriction of the full multiplier to the line
/// tau*nu. For 1-D kernels nu is +-1 and this reduces to space_samples.
inline SampledField marginal(const KernelSpec& kernel, std::array<double, 2> nu,
                             const Grid& line_grid) {
    if (line_grid.dimension() != 1) throw h12_error("marginal: line grid must be 1-D");
    const double nn = std::hypot(nu[0], nu[1]);
    if (std::fabs(nn - 1.0) > 1e-12) throw h12_error("marginal: |nu| must be 1");
    const std::int64_t n = line_grid.resolution();
    std::vector<std::complex<double>> coeff(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double tau = line_grid.frequency(i);
        coeff[i] = kernel.multiplier({tau * nu[0], tau * nu[1]});
    }
    return inverse(SpectralField(line_grid, std::move(coeff)));
}

/// Support annulus of the multiplier of psi_r - psi_{r/2}: it vanishes for
/// |xi| <= lo and |xi| >= hi.
struct BandSupport {
    double lo;
    double hi;
};
inline BandSupport psi_band_support(double r) { return {0.5 / r, 2.0 / r}; }

/// sup over the support annulus t in [1/4, 1] of |psi(t)-psi(2t)|^2/|phi(t)|^2.
/// Pairs the band (psi_r - psi_{r/2}) with phi at scale r/2.
inline double domination_constant(int samples = 200000) {
    const KernelSpec psi = KernelSpec::psi(1);
    const KernelSpec phi = KernelSpec::phi(1);
    double best = 0.0;
    for (int i = 1; i < samples; ++i) {
        const double t = 0.25 + 0.75 * static_cast<double>(i) / samples;
        const double num = psi.radial(t) - psi.radial(2.0 * t);
        const double den = phi.radial(t);
        best = std::max(best, num * num / (den * den));
    }
    return best;
}

}  // namespace h12
