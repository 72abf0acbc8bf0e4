#pragma once

#include <string>
#include <vector>

#include "h12/convolve.hpp"
#include "h12/norms.hpp"

namespace h12 {

/// delta^{-1} ||psi_delta * u - u||^2_{L2}; band-limited defect energy.
inline double bandlimited_defect(const SpectralField& spec, double delta) {
    if (delta < 4.0 * spec.grid().spacing())
        throw under_resolved_error("bandlimited_defect: delta below 4h");
    const KernelSpec psi = KernelSpec::psi(spec.grid().dimension());
    const double val = detail::weighted_plancherel_sum(spec, [&](double a) {
        const double m = psi.radial(delta * a) - 1.0;
        return m * m;
    });
    return val / delta;
}

inline double bandlimited_defect(const SampledField& u, double delta) {
    return bandlimited_defect(transform(u), delta);
}

/// Approximate-orthogonality audit:
///   lhs = ||psi_r*u - u||^2,
///   rhs = C (sum of dyadic band energies + the computable tail block),
/// with C = 3 from the nearest-neighbor band overlap. If the band cascade
/// hits the 4h floor before K bands, `partial` marks the truncation.
struct OrthogonalityAudit {
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 3.0;
    std::vector<double> band_energies;
    double tail = 0.0;
    int bands_used = 0;
    bool partial = false;
    bool ok = false;
};

inline OrthogonalityAudit orthogonality_audit(const SpectralField& spec, double r, int K) {
    const Grid& g = spec.grid();
    if (r < 4.0 * g.spacing()) throw under_resolved_error("orthogonality_audit: r below 4h");
    const KernelSpec psi = KernelSpec::psi(g.dimension());
    OrthogonalityAudit out;
    out.lhs = detail::weighted_plancherel_sum(spec, [&](double a) {
        const double m = psi.radial(r * a) - 1.0;
        return m * m;
    });
    double rk = r;
    for (int k = 0; k < K; ++k) {
        if (rk / 2.0 < 4.0 * g.spacing()) {
            out.partial = true;
            break;
        }
        out.band_energies.push_back(detail::weighted_plancherel_sum(spec, [&](double a) {
            const double m = psi.radial(rk * a) - psi.radial(rk * a / 2.0);
            return m * m;
        }));
        rk /= 2.0;
        ++out.bands_used;
    }
    // remaining defect at the finest reached scale, one more almost-orthogonal block
    out.tail = detail::weighted_plancherel_sum(spec, [&](double a) {
        const double m = psi.radial(rk * a) - 1.0;
        return m * m;
    });
    double sum = out.tail;
    for (double b : out.band_energies) sum += b;
    out.rhs = out.constant * sum;
    out.ok = out.lhs <= out.rhs * (1.0 + 1e-12);
    return out;
}

inline OrthogonalityAudit orthogonality_audit(const SampledField& u, double r, int K) {
    return orthogonality_audit(transform(u), r, K);
}

/// delta-cube census: densities of E over the (L/delta)^2 cube partition,
/// counting those in the intermediate window [2^{-n-1}, 1-2^{-n-1}].
struct CubeCensus {
    double delta = 0.0;
    std::int64_t total = 0;
    std::int64_t intermediate = 0;
    std::vector<std::int64_t> histogram;  // 16 density bins
};

inline CubeCensus cube_census(const SampledField& e, double delta) {
    const Grid& g = e.grid();
    if (g.dimension() != 2) throw h12_error("cube_census: need a 2-D field");
    const double h = g.spacing();
    const double cells_f = delta / h;
    const std::int64_t cells = static_cast<std::int64_t>(std::llround(cells_f));
    if (std::fabs(cells_f - cells) > 1e-9 || cells < 1)
        throw h12_error("cube_census: delta must be a multiple of h");
    if (g.resolution() % cells != 0)
        throw h12_error("cube_census: delta must divide L");
    const std::int64_t m = g.resolution() / cells;  // cubes per axis
    CubeCensus out;
    out.delta = delta;
    out.total = m * m;
    out.histogram.assign(16, 0);
    const double lo = std::pow(2.0, -3);  // 2^{-n-1}, n = 2
    const double hi = 1.0 - lo;
    for (std::int64_t bi = 0; bi < m; ++bi) {
        for (std::int64_t bj = 0; bj < m; ++bj) {
            double count = 0.0;
            for (std::int64_t i = 0; i < cells; ++i)
                for (std::int64_t j = 0; j < cells; ++j)
                    count += e.at(bi * cells + i, bj * cells + j);
            const double density = count / static_cast<double>(cells * cells);
            if (density >= lo && density <= hi) ++out.intermediate;
            const int bin = std::min(15, static_cast<int>(density * 16.0));
            ++out.histogram[bin];
        }
    }
    return out;
}

enum class PerimeterVerdict { FiniteConsistent, InfiniteConsistent, Unresolved };

inline const char* to_string(PerimeterVerdict v) {
    switch (v) {
        case PerimeterVerdict::FiniteConsistent: return "finite-perimeter-consistent";
        case PerimeterVerdict::InfiniteConsistent: return "infinite-perimeter-consistent";
        default: return "unresolved";
    }
}

/// Census and defect traces over a dyadic delta schedule plus a verdict from
/// the growth rate of intermediate_count * delta under halving:
/// every step >= 1.5 -> infinite-consistent, every step <= 1.2 -> finite.
struct DiagnosticReport {
    PerimeterVerdict verdict = PerimeterVerdict::Unresolved;
    std::vector<CubeCensus> census_trace;
    std::vector<std::pair<double, double>> defect_trace;  // (delta, defect)
    std::vector<double> growth_factors;
};

inline DiagnosticReport finite_perimeter_verdict(const SampledField& e,
                                                 const std::vector<double>& delta_schedule) {
    if (delta_schedule.size() < 3)
        throw h12_error("finite_perimeter_verdict: need at least 3 dyadic scales");
    DiagnosticReport out;
    const SpectralField spec = transform(e);
    for (double d : delta_schedule) {
        out.census_trace.push_back(cube_census(e, d));
        out.defect_trace.emplace_back(d, bandlimited_defect(spec, d));
    }
    bool all_grow = true, all_flat = true, degenerate = false;
    for (std::size_t i = 0; i + 1 < out.census_trace.size(); ++i) {
        const double a =
            static_cast<double>(out.census_trace[i].intermediate) * out.census_trace[i].delta;
        const double b = static_cast<double>(out.census_trace[i + 1].intermediate) *
                         out.census_trace[i + 1].delta;
        if (a <= 0.0 || b <= 0.0) {
            degenerate = true;
            break;
        }
        const double f = b / a;
        out.growth_factors.push_back(f);
        if (f < 1.5) all_grow = false;
        if (f > 1.2) all_flat = false;
    }
    if (degenerate)
        out.verdict = PerimeterVerdict::Unresolved;
    else if (all_grow)
        out.verdict = PerimeterVerdict::InfiniteConsistent;
    else if (all_flat)
        out.verdict = PerimeterVerdict::FiniteConsistent;
    return out;
}

}  // namespace h12
