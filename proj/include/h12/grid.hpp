#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace h12 {

class h12_error : public std::runtime_error {
public:
    explicit h12_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Scale finer than the grid can represent (multiplier would alias).
class under_resolved_error : public h12_error {
public:
    explicit under_resolved_error(const std::string& msg) : h12_error(msg) {}
};

/// Shape does not fit inside the periodic cell.
class margin_error : public h12_error {
public:
    explicit margin_error(const std::string& msg) : h12_error(msg) {}
};

/// A construction cannot proceed within its resource caps; `binding`
/// names the constraint that failed first.
class infeasible_error : public h12_error {
public:
    infeasible_error(std::string msg, std::string binding_constraint)
        : h12_error(msg + " [binding: " + binding_constraint + "]"),
          raw(std::move(msg)),
          binding(std::move(binding_constraint)) {}
    std::string raw;
    std::string binding;
};

/// Scientific-notation formatting for error payloads (std::to_string
/// flattens small doubles to 0.000000).
inline std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

/// Periodic grid on [0,L)^d, d in {1,2}, N samples per axis.
/// Frequencies are xi_m = 2*pi*m/L for m in [-N/2, N/2).
class Grid {
public:
    Grid(int dimension, double period, std::int64_t resolution)
        : dim_(dimension), period_(period), n_(resolution) {
        if (dim_ != 1 && dim_ != 2) throw h12_error("Grid: dimension must be 1 or 2");
        if (!(period_ > 0.0) || !std::isfinite(period_)) throw h12_error("Grid: period must be positive");
        if (n_ < 16) throw h12_error("Grid: resolution must be >= 16");
        if (!is_power_of_two(n_)) throw h12_error("Grid: resolution must be a power of two");
    }

    int dimension() const { return dim_; }
    double period() const { return period_; }
    std::int64_t resolution() const { return n_; }
    double spacing() const { return period_ / static_cast<double>(n_); }
    double freq_step() const { return 2.0 * M_PI / period_; }
    std::int64_t size() const { return dim_ == 1 ? n_ : n_ * n_; }

    /// Signed frequency index for FFT bin i (standard order: 0..N/2-1, -N/2..-1).
    std::int64_t mode(std::int64_t i) const { return i < n_ / 2 ? i : i - n_; }
    double frequency(std::int64_t i) const { return freq_step() * static_cast<double>(mode(i)); }

    /// Grid point coordinate along one axis.
    double coord(std::int64_t i) const { return spacing() * static_cast<double>(i); }

    /// Shortest periodic distance between two coordinates.
    double torus_dist(double a, double b) const {
        double d = std::fabs(a - b);
        d = std::fmod(d, period_);
        return std::min(d, period_ - d);
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && period_ == o.period_ && n_ == o.n_;
    }

private:
    int dim_;
    double period_;
    std::int64_t n_;
};

/// Real samples on a Grid; immutable after construction.
class SampledField {
public:
    SampledField(Grid grid, std::vector<double> samples)
        : grid_(grid), samples_(std::move(samples)) {
        if (static_cast<std::int64_t>(samples_.size()) != grid_.size())
            throw h12_error("SampledField: sample count does not match grid");
        for (double v : samples_)
            if (!std::isfinite(v)) throw h12_error("SampledField: non-finite sample");
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& samples() const { return samples_; }
    double operator[](std::int64_t i) const { return samples_[i]; }
    std::int64_t size() const { return grid_.size(); }

    /// Row-major access for 2-D fields.
    double at(std::int64_t i, std::int64_t j) const {
        return samples_[i * grid_.resolution() + j];
    }

private:
    Grid grid_;
    std::vector<double> samples_;
};

/// Complex Fourier coefficients, same layout as the samples they came from.
/// Coefficient k approximates \hat u(xi_k) = \int u(x) e^{-i xi_k . x} dx
/// (forward transform scaled by h^d).
class SpectralField {
public:
    SpectralField(Grid grid, std::vector<std::complex<double>> coeff)
        : grid_(grid), coeff_(std::move(coeff)) {
        if (static_cast<std::int64_t>(coeff_.size()) != grid_.size())
            throw h12_error("SpectralField: coefficient count does not match grid");
    }

    const Grid& grid() const { return grid_; }
    const std::vector<std::complex<double>>& coefficients() const { return coeff_; }
    std::int64_t size() const { return grid_.size(); }

private:
    Grid grid_;
    std::vector<std::complex<double>> coeff_;
};

}  // namespace h12
