#pragma once

#include "h12/kernels.hpp"
#include "h12/norms.hpp"

namespace h12 {

namespace detail {

inline void check_scale(const Grid& g, double r) {
    if (!(r > 0.0)) throw h12_error("convolve: scale must be positive");
    if (r < 2.0 * g.spacing())
        throw under_resolved_error("convolve: scale " + std::to_string(r) +
                                   " below hard floor 2h = " + std::to_string(2.0 * g.spacing()));
}

}  // namespace detail

/// Multiply the spectrum by the kernel multiplier at r*xi.
inline SpectralField convolve_spectrum(const SpectralField& spec, const KernelSpec& kernel,
                                       double r) {
    const Grid& g = spec.grid();
    detail::check_scale(g, r);
    const std::int64_t n = g.resolution();
    std::vector<std::complex<double>> out = spec.coefficients();
    if (g.dimension() == 1) {
        for (std::int64_t i = 0; i < n; ++i)
            out[i] *= kernel.multiplier({r * g.frequency(i), 0.0});
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            const double fi = g.frequency(i);
            for (std::int64_t j = 0; j < n; ++j)
                out[i * n + j] *= kernel.multiplier({r * fi, r * g.frequency(j)});
        }
    }
    return SpectralField(g, std::move(out));
}

/// f_r * u realized as spectral multiplication by the multiplier at r*xi.
inline SampledField convolve(const SampledField& u, const KernelSpec& kernel, double r) {
    return inverse(convolve_spectrum(transform(u), kernel, r));
}

/// ||f_r * u||^2_{L2} straight from the spectrum (Parseval), no inverse
/// transform. Workhorse of the scale scans.
inline double convolved_l2_sq(const SpectralField& spec, const KernelSpec& kernel, double r) {
    const Grid& g = spec.grid();
    detail::check_scale(g, r);
    const auto& c = spec.coefficients();
    const std::int64_t n = g.resolution();
    double acc = 0.0;
    if (g.dimension() == 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            const double m = kernel.multiplier({r * g.frequency(i), 0.0});
            acc += m * m * std::norm(c[i]);
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            const double fi = g.frequency(i);
            const std::complex<double>* row = c.data() + i * n;
            for (std::int64_t j = 0; j < n; ++j) {
                const double m = kernel.multiplier({r * fi, r * g.frequency(j)});
                acc += m * m * std::norm(row[j]);
            }
        }
    }
    return acc * std::pow(g.freq_step() / (2.0 * M_PI), g.dimension());
}

/// ||gamma_eps * u||^2_{H^{1/2}} from the spectrum.
inline double smoothed_h_half_sq(const SpectralField& spec, double eps) {
    detail::check_scale(spec.grid(), eps);
    return detail::weighted_plancherel_sum(spec, [&](double a) {
        const double t = eps * a;
        return a * std::exp(-t * t);
    });
}

}  // namespace h12
