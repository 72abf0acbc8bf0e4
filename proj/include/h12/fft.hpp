#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "h12/grid.hpp"

namespace h12 {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place complex DFT; sign = FFTW_FORWARD or FFTW_BACKWARD.
/// FFTW's planner is not thread-safe, so plan creation is serialized;
/// execution is re-entrant.
inline void fft_inplace(const Grid& g, std::vector<std::complex<double>>& buf, int sign) {
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        const int n = static_cast<int>(g.resolution());
        plan = (g.dimension() == 1)
                   ? fftw_plan_dft_1d(n, data, data, sign, FFTW_ESTIMATE)
                   : fftw_plan_dft_2d(n, n, data, data, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace detail

/// Forward transform: coefficient k = h^d * sum_j u_j e^{-i xi_k . x_j},
/// the Riemann sum for \int u e^{-i xi x} dx.
inline SpectralField transform(const SampledField& field) {
    const Grid& g = field.grid();
    std::vector<std::complex<double>> buf(field.samples().begin(), field.samples().end());
    detail::fft_inplace(g, buf, FFTW_FORWARD);
    const double scale = std::pow(g.spacing(), g.dimension());
    for (auto& c : buf) c *= scale;
    return SpectralField(g, std::move(buf));
}

/// Inverse transform back to samples: u_j = (2pi)^{-d} sum_k c_k e^{+i xi_k x_j} (dxi)^d.
/// The imaginary part is dropped; it is at round-off level for spectra of
/// real fields and for even multipliers.
inline SampledField inverse(const SpectralField& spec) {
    const Grid& g = spec.grid();
    std::vector<std::complex<double>> buf = spec.coefficients();
    detail::fft_inplace(g, buf, FFTW_BACKWARD);
    const double scale = 1.0 / std::pow(g.period(), g.dimension());
    std::vector<double> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real() * scale;
    return SampledField(g, std::move(out));
}

/// Largest |Im| seen when inverting; diagnostic for real-multiplier paths.
inline double inverse_imag_residual(const SpectralField& spec) {
    const Grid& g = spec.grid();
    std::vector<std::complex<double>> buf = spec.coefficients();
    detail::fft_inplace(g, buf, FFTW_BACKWARD);
    const double scale = 1.0 / std::pow(g.period(), g.dimension());
    double worst = 0.0;
    for (const auto& c : buf) worst = std::max(worst, std::fabs(c.imag() * scale));
    return worst;
}

}  // namespace h12
