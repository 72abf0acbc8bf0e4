#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "h12/convolve.hpp"
#include "h12/scale_functionals.hpp"

namespace h12::cx {

/// Primitive cell of a stage function, local coordinates in [0,1).
/// v0 == v1: constant value; otherwise the full C-infinity transition
/// v0 + (v1 - v0) * S((x - lo)/(hi - lo)), flat to all orders at both ends,
/// so any sequence of cells whose endpoint values agree is globally smooth.
struct Cell {
    double lo, hi;
    double v0, v1;

    double width() const { return hi - lo; }
    bool constant() const { return v0 == v1; }
};

namespace detail {

inline double eval_cell(const Cell& c, double x) {
    if (c.constant()) return c.v0;
    return c.v0 + (c.v1 - c.v0) * smooth_step((x - c.lo) / (c.hi - c.lo));
}

/// Exact for the symmetric step: the transition integrates to the midpoint.
inline double cell_integral(const Cell& c) { return 0.5 * (c.v0 + c.v1) * c.width(); }

inline double cell_undecided(const Cell& c) {
    if (c.constant()) return (c.v0 > 0.0 && c.v0 < 1.0) ? c.width() : 0.0;
    return c.width();  // endpoints carry measure zero
}

/// Sharpest variation scale; the certification raster must resolve it.
inline double cell_feature(const Cell& c) {
    if (c.constant()) return std::numeric_limits<double>::infinity();
    return c.width() / 4.0;
}

struct LevelInterval {
    double lo, hi;
    int value;  // 0 or 1
};

/// integral of psi_t over [0,1] (exact for the symmetric sigma).
inline double psi_integral(double t) { return 1.0 - 1.5 * t; }

/// 16-node Gauss-Legendre rule mapped to [0,1].
inline const std::array<std::pair<double, double>, 16>& gauss16() {
    static const std::array<std::pair<double, double>, 16> table = [] {
        const double xs[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                              0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                              0.9445750230732326, 0.9894009349916499};
        const double ws[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};
        std::array<std::pair<double, double>, 16> t{};
        for (int i = 0; i < 8; ++i) {
            t[2 * i] = {0.5 * (1.0 - xs[i]), 0.5 * ws[i]};
            t[2 * i + 1] = {0.5 * (1.0 + xs[i]), 0.5 * ws[i]};
        }
        return t;
    }();
    return table;
}

}  // namespace detail

struct CompatRecord {
    double r;
    double value;
    double bound;
};

struct Certification {
    double undecided = 0.0;
    double undecided_bound = 0.0;
    int interval_count = 0;
    double smooth_value = 0.0;
    double smooth_bound = 0.0;
    std::vector<CompatRecord> compat;  // measured against the next stage
    bool inclusions_ok = true;
    std::int64_t cells_exact = 0;       // copied verbatim, difference identically zero
    std::int64_t cells_matched = 0;     // averages matched by bisection
    std::int64_t cells_mismatched = 0;  // bridges / clamped profiles
    double max_avg_mismatch = 0.0;
};

/// One stage phi_k: cells partition [0,1), endpoint values agree across
/// shared edges, so the stage is C-infinity with 0/1 level sets that are
/// finite unions of closed intervals.
struct CompatibleState {
    int level = 1;
    double eps = 0.0;
    std::vector<Cell> cells;
    Certification cert;

    double eval(double x) const {
        if (x < 0.0 || x >= 1.0) return 0.0;
        std::size_t lo = 0, hi = cells.size();
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cells[mid].lo <= x) lo = mid;
            else hi = mid;
        }
        return detail::eval_cell(cells[lo], x);
    }

    double undecided_measure() const {
        double m = 0.0;
        for (const auto& c : cells) m += detail::cell_undecided(c);
        return m;
    }

    double min_feature() const {
        double f = std::numeric_limits<double>::infinity();
        for (const auto& c : cells) f = std::min(f, detail::cell_feature(c));
        return f;
    }

    double integral() const {
        double m = 0.0;
        for (const auto& c : cells) m += detail::cell_integral(c);
        return m;
    }

    /// Merged closed intervals of {phi=0} and {phi=1}, ordered by position.
    std::vector<detail::LevelInterval> level_sets() const {
        std::vector<detail::LevelInterval> merged;
        for (const auto& c : cells) {
            if (!c.constant() || (c.v0 != 0.0 && c.v0 != 1.0)) continue;
            const int value = c.v0 == 1.0 ? 1 : 0;
            if (!merged.empty() && merged.back().value == value &&
                std::fabs(merged.back().hi - c.lo) < 1e-14)
                merged.back().hi = c.hi;
            else
                merged.push_back({c.lo, c.hi, value});
        }
        return merged;
    }

    int interval_count() const { return static_cast<int>(level_sets().size()); }

    /// Maximal open intervals with 0 < phi < 1, plus the adjacent level-set
    /// values (what the interval rises from / falls to).
    struct Ramp {
        double lo, hi;
        int left_value, right_value;
    };
    std::vector<Ramp> undecided_intervals() const {
        std::vector<Ramp> out;
        const auto ls = level_sets();
        for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
            if (ls[i + 1].lo > ls[i].hi + 1e-15)
                out.push_back({ls[i].hi, ls[i + 1].lo, ls[i].value, ls[i + 1].value});
        }
        return out;
    }
};

/// Embedding of the unit-interval construction into a periodic grid.
struct EmbedConfig {
    double period = 4.0;
    double offset = 1.5;
    std::int64_t resolution = std::int64_t(1) << 22;

    Grid grid() const { return Grid(1, period, resolution); }
};

inline SampledField rasterize(const CompatibleState& state, const EmbedConfig& embed) {
    const Grid g = embed.grid();
    std::vector<double> out(g.size(), 0.0);
    const double h = g.spacing();
    for (const auto& c : state.cells) {
        const std::int64_t i0 =
            static_cast<std::int64_t>(std::ceil((c.lo + embed.offset) / h - 1e-12));
        const std::int64_t i1 =
            static_cast<std::int64_t>(std::ceil((c.hi + embed.offset) / h - 1e-12));
        for (std::int64_t i = std::max<std::int64_t>(0, i0);
             i < std::min(g.resolution(), i1); ++i)
            out[i] = detail::eval_cell(c, g.coord(i) - embed.offset);
    }
    return SampledField(g, std::move(out));
}

/// Profile with a prescribed average on a unit cell: the plateau family
/// psi_t for a > 1/2 (t from bisection), the rescaled psi_{t'} (t' = 1/10,
/// widened to t_min when the raster floor demands) for a <= 1/2. t_min
/// clamps unresolvably thin plateaus; `matched` records whether the
/// average was hit.
struct RampProfile {
    bool zero = false;
    bool plateau = false;  // otherwise scaled bump
    double t = 0.1;        // ramp fraction
    double c = 0.0;        // bump amplitude
    double integral = 0.0;
    double zero_one_measure = 0.0;
    bool matched = true;

    /// Primitive cells of the profile scaled into [lo, hi).
    void emit(double lo, double hi, std::vector<Cell>& out) const {
        const double w = hi - lo;
        if (zero) {
            out.push_back({lo, hi, 0.0, 0.0});
            return;
        }
        const double amp = plateau ? 1.0 : c;
        out.push_back({lo, lo + 0.5 * t * w, 0.0, 0.0});
        out.push_back({lo + 0.5 * t * w, lo + t * w, 0.0, amp});
        out.push_back({lo + t * w, hi - t * w, amp, amp});
        out.push_back({hi - t * w, hi - 0.5 * t * w, amp, 0.0});
        out.push_back({hi - 0.5 * t * w, hi, 0.0, 0.0});
    }
};

inline RampProfile ramp_profile(double a, double t_min = 0.0) {
    if (a >= 1.0 || a < 0.0) throw h12_error("ramp_profile: need target average in [0,1)");
    RampProfile out;
    if (a == 0.0) {
        out.zero = true;
        out.zero_one_measure = 1.0;
        return out;
    }
    if (a > 0.5) {
        // integral psi_t = 1 - 1.5 t is decreasing; bisect
        double lo = 1e-13, hi = 0.5;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (detail::psi_integral(mid) > a) lo = mid;
            else hi = mid;
        }
        out.plateau = true;
        out.t = 0.5 * (lo + hi);
        if (out.t < t_min) {
            out.t = t_min;
            out.matched = false;
        }
        out.integral = detail::psi_integral(out.t);
        out.zero_one_measure = 1.0 - out.t;
    } else {
        // c * psi_{t'}: integral c (1 - 1.5 t') is increasing in c
        out.t = std::max(0.1, t_min);
        const double it_ = detail::psi_integral(out.t);
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid * it_ < a) lo = mid;
            else hi = mid;
        }
        out.c = 0.5 * (lo + hi);
        if (out.c > 1.0 - 1e-12) {
            out.c = 1.0 - 1e-12;
            out.matched = false;
        }
        out.integral = out.c * it_;
        out.zero_one_measure = out.t;
    }
    return out;
}

/// Mirror family for cells gluing at level one: value one on the margins,
/// a smooth dip of depth c in the middle; exact average for any a >= 1.5 t.
struct DipProfile {
    double t = 0.1;
    double c = 0.0;
    double integral = 0.0;
    bool matched = true;

    void emit(double lo, double hi, std::vector<Cell>& out) const {
        const double w = hi - lo;
        const double v = 1.0 - c;
        out.push_back({lo, lo + 0.5 * t * w, 1.0, 1.0});
        out.push_back({lo + 0.5 * t * w, lo + t * w, 1.0, v});
        out.push_back({lo + t * w, hi - t * w, v, v});
        out.push_back({hi - t * w, hi - 0.5 * t * w, v, 1.0});
        out.push_back({hi - 0.5 * t * w, hi, 1.0, 1.0});
    }
};

inline DipProfile dip_profile(double a, double t_min = 0.0) {
    DipProfile out;
    out.t = std::max(0.1, t_min);
    const double span = detail::psi_integral(out.t);  // 1 - 1.5 t
    out.c = (1.0 - a) / span;
    if (out.c > 1.0 - 1e-12) {
        out.c = 1.0 - 1e-12;
        out.matched = false;
    }
    if (out.c < 0.0) {
        out.c = 0.0;
        out.matched = false;
    }
    out.integral = 1.0 - out.c * span;
    return out;
}

/// Default envelope phi_1: full-width smooth bump with {phi=1} = [0.48, 0.52].
inline CompatibleState initial_state() {
    CompatibleState s;
    s.level = 1;
    s.cells = {{0.0, 0.02, 0.0, 0.0},
               {0.02, 0.48, 0.0, 1.0},
               {0.48, 0.52, 1.0, 1.0},
               {0.52, 0.98, 1.0, 0.0},
               {0.98, 1.0, 0.0, 0.0}};
    s.cert.undecided = s.undecided_measure();
    s.cert.undecided_bound = 0.99;
    s.cert.interval_count = s.interval_count();
    return s;
}

struct RefinementPlan {
    std::int64_t n_prime = 0;
    // the three sufficiency checks of the averaging argument, measured
    double averaging = 0.0;  // matched-cell contribution bound
    double averaging_required = 0.0;
    double dilution = 0.0;  // bridge-cell mass times the mollifier peak
    double dilution_required = 0.0;
    double mollifier_commutator = 0.0;  // ||gamma_delta - chi_w * gamma_delta||_L1
    double mollifier_required = 0.0;
    bool ok = false;
};

namespace detail {

/// integral of phi over [x0, x1]: exact on whole cells, Gauss on partials.
inline double partial_integral(const CompatibleState& s, double x0, double x1) {
    double acc = 0.0;
    for (const auto& c : s.cells) {
        if (c.hi <= x0 || c.lo >= x1) continue;
        const double lo = std::max(x0, c.lo), hi = std::min(x1, c.hi);
        if (lo == c.lo && hi == c.hi) {
            acc += cell_integral(c);
        } else if (c.constant()) {
            acc += c.v0 * (hi - lo);
        } else {
            for (const auto& [node, w] : gauss16())
                acc += w * (hi - lo) * eval_cell(c, lo + node * (hi - lo));
        }
    }
    return acc;
}

inline double gamma_peak(double delta) { return 1.0 / (delta * std::sqrt(2.0 * M_PI)); }

/// ||gamma_delta - chi_w * gamma_delta||_L1 by direct quadrature.
inline double mollifier_commutator(double delta, double w) {
    const int n = 20000;
    const double span = 12.0 * delta;
    const double dx = 2.0 * span / n;
    auto gauss = [&](double x) {
        return std::exp(-0.5 * x * x / (delta * delta)) / (delta * std::sqrt(2.0 * M_PI));
    };
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -span + (i + 0.5) * dx;
        double avg = 0.0;
        for (int j = 0; j < 8; ++j) avg += gauss(x - w / 2.0 + (j + 0.5) * w / 8.0);
        avg /= 8.0;
        acc += std::fabs(gauss(x) - avg) * dx;
    }
    return acc;
}

}  // namespace detail

/// Choose the refinement cell count: cells must separate the level-set
/// boundary points, and the three numerical sufficiency checks of the
/// averaging argument must pass at scale delta with tolerance tol (margins
/// measured, not assumed).
inline RefinementPlan select_refinement_N(const CompatibleState& state, double delta,
                                          double tol, std::int64_t cap) {
    if (!(tol > 0.0) || !(delta > 0.0))
        throw h12_error("select_refinement_N: need positive delta and tol");
    std::vector<double> pts;
    for (const auto& li : state.level_sets()) {
        if (li.lo > 1e-14) pts.push_back(li.lo);
        if (li.hi < 1.0 - 1e-14) pts.push_back(li.hi);
    }
    std::sort(pts.begin(), pts.end());
    double min_gap = 1.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        min_gap = std::min(min_gap, pts[i + 1] - pts[i]);

    const double osc_start = 4.0 * std::sqrt(2.0 / M_PI) / (delta * tol);
    std::int64_t n = 64;
    while (static_cast<double>(n) < osc_start || 1.0 / static_cast<double>(n) > 0.5 * min_gap) {
        n *= 2;
        if (n > cap)
            throw infeasible_error(
                "select_refinement_N: no admissible N' within the resolution cap",
                "compatibility tolerance " + fmt_g(tol) + " at scale " + fmt_g(delta) +
                    " requires cell width <= " + fmt_g(1.0 / osc_start) +
                    " and boundary separation " + fmt_g(0.5 * min_gap) + ", cap " +
                    std::to_string(cap));
    }

    RefinementPlan plan;
    for (; n <= cap; n *= 2) {
        plan.n_prime = n;
        const double w = 1.0 / static_cast<double>(n);
        // (i) averaging: matched cells contribute at most ||gamma'||_L1 * w
        plan.averaging = std::sqrt(2.0 / M_PI) / delta * w;
        plan.averaging_required = 0.25 * tol;
        // (ii) dilution of the bridge cells: two per converted interval;
        // the widest-first plan converts just enough ramps for the decay
        const auto ramps = state.undecided_intervals();
        std::vector<double> widths;
        for (const auto& r : ramps) widths.push_back(r.hi - r.lo);
        std::sort(widths.rbegin(), widths.rend());
        const double undecided = state.undecided_measure();
        double planned = 0.0, yield = 0.0;
        for (double wd : widths) {
            if (yield >= 0.04 * undecided) break;
            yield += 0.4 * wd;
            planned += 1.0;
        }
        plan.dilution = 2.0 * std::max(planned, 1.0) * w * detail::gamma_peak(delta);
        plan.dilution_required = 0.25 * tol;
        // (iii) mollifier commutator at the cell scale
        plan.mollifier_commutator = detail::mollifier_commutator(delta, w);
        plan.mollifier_required = 0.25 * tol;
        plan.ok = plan.averaging <= plan.averaging_required &&
                  plan.dilution <= plan.dilution_required &&
                  plan.mollifier_commutator <= plan.mollifier_required;
        if (plan.ok) return plan;
    }
    throw infeasible_error("select_refinement_N: sufficiency checks not met within cap",
                           "measured at cap " + std::to_string(cap) + ": averaging=" +
                               fmt_g(plan.averaging) + " dilution=" + fmt_g(plan.dilution) +
                               " mollifier=" + fmt_g(plan.mollifier_commutator) +
                               " vs tol/4 = " + fmt_g(0.25 * tol));
}

struct RefineOptions {
    double t_min = 0.02;                 // thinnest ramp fraction per cell
    double undecided_target = 0.96;      // aim below the 0.99 certificate
    double min_bridge_width_frac = 0.1;  // of a cell
    double raster_h = 0.0;               // certification spacing, tightens t_min
};

namespace detail {

inline CompatibleState refine_with(const CompatibleState& state, std::int64_t n_prime,
                                   const std::vector<CompatibleState::Ramp>& convert,
                                   const RefineOptions& opt) {
    const double W = 1.0 / static_cast<double>(n_prime);
    CompatibleState next;
    next.level = state.level + 1;
    Certification& cert = next.cert;

    // copy [lo, hi) verbatim; conversion boundaries always land in constant
    // cells, so clipped parts stay representable
    auto push_copy_region = [&](double lo, double hi) {
        for (const auto& c : state.cells) {
            if (c.hi <= lo || c.lo >= hi) continue;
            const double a = std::max(lo, c.lo), b = std::min(hi, c.hi);
            if (b <= a + 1e-18) continue;
            if (a == c.lo && b == c.hi) {
                next.cells.push_back(c);
            } else {
                if (!c.constant())
                    throw h12_error("refine: conversion boundary cuts a transition cell");
                next.cells.push_back({a, b, c.v0, c.v0});
            }
            ++cert.cells_exact;
        }
    };

    auto record_match = [&](double got, double target, double scale, bool matched) {
        if (matched && std::fabs(got - target) < 1e-10 * std::max(1.0, scale)) {
            ++cert.cells_matched;
        } else {
            ++cert.cells_mismatched;
            cert.max_avg_mismatch =
                std::max(cert.max_avg_mismatch, std::fabs(got - target) / scale);
        }
    };

    const double t_min = std::max(opt.t_min, 32.0 * opt.raster_h * n_prime);
    const double a_switch = std::min(0.75, 1.0 - 1.5 * t_min);
    const double a_low = std::max(0.2, 1.6 * t_min);
    const double wr = std::max({16.0 * opt.raster_h, opt.min_bridge_width_frac * W,
                                0.5 * t_min * W});

    // single-cell monotone transition between the glue levels, with the
    // rise/fall positioned to match the cell average of phi when feasible
    auto emit_transition = [&](double c0, double c1, double a_target, bool rising) {
        bool matched = true;
        if (rising) {
            // [0 ... q][rise q..q+wr][1 ... c1]: integral (c1-q-wr) + wr/2
            double q = c1 - wr / 2.0 - a_target * W;
            if (q < c0) { q = c0; matched = false; }
            if (q > c1 - wr) { q = c1 - wr; matched = false; }
            if (q > c0) next.cells.push_back({c0, q, 0.0, 0.0});
            next.cells.push_back({q, q + wr, 0.0, 1.0});
            if (q + wr < c1) next.cells.push_back({q + wr, c1, 1.0, 1.0});
            record_match((c1 - q - wr) + 0.5 * wr, a_target * W, W, matched);
        } else {
            double q = c0 + a_target * W - wr / 2.0;
            if (q < c0) { q = c0; matched = false; }
            if (q > c1 - wr) { q = c1 - wr; matched = false; }
            if (q > c0) next.cells.push_back({c0, q, 1.0, 1.0});
            next.cells.push_back({q, q + wr, 1.0, 0.0});
            if (q + wr < c1) next.cells.push_back({q + wr, c1, 0.0, 0.0});
            record_match((q - c0) + 0.5 * wr, a_target * W, W, matched);
        }
    };

    double cursor = 0.0;
    for (const auto& r : convert) {
        const std::int64_t i0 = static_cast<std::int64_t>(std::floor(r.lo / W));
        const std::int64_t i1 = static_cast<std::int64_t>(std::floor(r.hi / W));
        const double conv_lo = static_cast<double>(i0) * W;
        const double conv_hi = static_cast<double>(i1 + 1) * W;
        if (conv_lo < cursor) continue;  // conversion regions must stay disjoint
        push_copy_region(cursor, conv_lo);
        cursor = conv_hi;

        // bridge cell containing the left endpoint r.lo: constant at the
        // adjacent level value (inclusion-safe; the mismatch is the small
        // mass of phi's own tail inside the cell)
        {
            const double c0 = conv_lo, c1 = conv_lo + W;
            const double target = partial_integral(state, c0, c1);
            const double v = static_cast<double>(r.left_value);
            next.cells.push_back({c0, c1, v, v});
            record_match(v * W, target, W, false);
        }

        // interior cells: profiles glue at level 0 or 1; a matched
        // transition cell flips the glue where the family changes
        int glue = r.left_value;
        const int target_glue = r.right_value;
        for (std::int64_t i = i0 + 1; i < i1; ++i) {
            const double c0 = static_cast<double>(i) * W, c1 = c0 + W;
            const double a_target =
                std::min(std::max(state.eval(c0), 0.0), 1.0 - 1e-12);
            const bool last = (i == i1 - 1);
            if (last && glue != target_glue) {
                emit_transition(c0, c1, a_target, glue == 0);
                glue = target_glue;
                continue;
            }
            if (glue == 0) {
                if (a_target > a_switch && !last) {
                    emit_transition(c0, c1, a_target, true);
                    glue = 1;
                    continue;
                }
                if (a_target <= 0.0) {
                    next.cells.push_back({c0, c1, 0.0, 0.0});
                    ++cert.cells_matched;
                    continue;
                }
                const RampProfile prof =
                    ramp_profile(std::min(a_target, 1.0 - 1.5 * t_min), t_min);
                prof.emit(c0, c1, next.cells);
                record_match(prof.integral, a_target, 1.0, prof.matched);
            } else {
                if (a_target < a_low && !last) {
                    emit_transition(c0, c1, a_target, false);
                    glue = 0;
                    continue;
                }
                const DipProfile dip = dip_profile(std::max(a_target, 1.5 * t_min), t_min);
                dip.emit(c0, c1, next.cells);
                record_match(dip.integral, a_target, 1.0, dip.matched);
            }
        }

        // bridge cell containing the right endpoint r.hi
        {
            const double c0 = static_cast<double>(i1) * W, c1 = conv_hi;
            const double target = partial_integral(state, c0, c1);
            const double v = static_cast<double>(r.right_value);
            next.cells.push_back({c0, c1, v, v});
            record_match(v * W, target, W, false);
        }
    }
    push_copy_region(cursor, 1.0);

    // drop degenerate cells and verify the partition is contiguous
    std::vector<Cell> cleaned;
    cleaned.reserve(next.cells.size());
    for (const auto& c : next.cells)
        if (c.hi - c.lo > 1e-16) cleaned.push_back(c);
    next.cells = std::move(cleaned);
    double edge = 0.0;
    for (const auto& c : next.cells) {
        if (std::fabs(c.lo - edge) > 1e-12)
            throw h12_error("refine: cell partition is not contiguous");
        edge = c.hi;
    }
    if (std::fabs(edge - 1.0) > 1e-12)
        throw h12_error("refine: cell partition does not close at 1");

    cert.undecided = next.undecided_measure();
    cert.undecided_bound = std::pow(0.99, next.level);
    cert.interval_count = next.interval_count();

    // exact inclusion verification against the previous level sets
    const auto new_ls = next.level_sets();
    auto covered = [&](const detail::LevelInterval& q) {
        auto it = std::upper_bound(
            new_ls.begin(), new_ls.end(), q.lo + 1e-12,
            [](double x, const detail::LevelInterval& li) { return x < li.lo; });
        while (it != new_ls.begin()) {
            --it;
            if (it->value == q.value && it->lo <= q.lo + 1e-12 && it->hi >= q.hi - 1e-12)
                return true;
            if (it->hi < q.lo - 1e-12) break;
        }
        return false;
    };
    for (const auto& li : state.level_sets())
        if (!covered(li)) cert.inclusions_ok = false;
    return next;
}

}  // namespace detail

/// Build phi_{k+1} from phi_k on the uniform N'-grid. Maximal undecided
/// intervals are converted widest-first (average-matching profiles inside,
/// monotone bridges at the two ends) until the undecided measure clears the
/// decay target; the remaining ramps are copied verbatim, which is a
/// stronger guarantee than average matching (the difference vanishes there).
inline CompatibleState refine(const CompatibleState& state, std::int64_t n_prime,
                              RefineOptions opt = {}) {
    const double W = 1.0 / static_cast<double>(n_prime);
    auto ramps = state.undecided_intervals();
    if (ramps.empty() && state.undecided_measure() < 1e-12) {
        // already an indicator a.e.: nothing to oscillate, copy through
        return detail::refine_with(state, n_prime, {}, opt);
    }
    std::sort(ramps.begin(), ramps.end(),
              [](const auto& a, const auto& b) { return a.hi - a.lo > b.hi - b.lo; });
    std::vector<CompatibleState::Ramp> convertible;
    for (const auto& r : ramps) {
        const std::int64_t i0 = static_cast<std::int64_t>(std::floor(r.lo / W));
        const std::int64_t i1 = static_cast<std::int64_t>(std::floor(r.hi / W));
        if (i1 - i0 >= 3) convertible.push_back(r);
    }
    if (convertible.empty())
        throw infeasible_error(
            "refine: no convertible undecided interval at this N'",
            "all ramps span fewer than 3 cells of width " + std::to_string(W));
    const double before = state.undecided_measure();
    for (std::size_t count = 1; count <= convertible.size(); ++count) {
        std::vector<CompatibleState::Ramp> chosen(convertible.begin(),
                                                  convertible.begin() + count);
        std::sort(chosen.begin(), chosen.end(),
                  [](const auto& a, const auto& b) { return a.lo < b.lo; });
        CompatibleState next = detail::refine_with(state, n_prime, chosen, opt);
        if (next.cert.undecided <= opt.undecided_target * before ||
            count == convertible.size()) {
            if (next.cert.undecided > 0.99 * before)
                throw infeasible_error(
                    "refine: undecided measure did not decay by 0.99",
                    "measured ratio " + std::to_string(next.cert.undecided / before) +
                        " with all convertible ramps converted");
            return next;
        }
    }
    throw infeasible_error("refine: unreachable", "conversion loop exhausted");
}

/// Largest epsilon in a downward dyadic scan with
/// |log eps|^{-1} ||gamma_eps * phi||^2_{H^{1/2}} < threshold.
inline double select_epsilon(const CompatibleState& state, double threshold,
                             const EmbedConfig& embed, const SpectralField* cached = nullptr,
                             double eps_start = 0.5) {
    if (!(threshold > 0.0))
        throw infeasible_error("select_epsilon: threshold not attainable", "threshold <= 0");
    const Grid g = embed.grid();
    if (state.min_feature() < 4.0 * g.spacing())
        throw infeasible_error(
            "select_epsilon: stage features below the raster floor",
            "min feature " + std::to_string(state.min_feature()) + " < 4h = " +
                std::to_string(4.0 * g.spacing()) + " at resolution cap " +
                std::to_string(g.resolution()));
    SpectralField local = cached ? *cached : transform(rasterize(state, embed));
    for (double eps = eps_start; eps >= 4.0 * g.spacing(); eps /= 2.0) {
        const double v = smoothed_h12_energy(local, eps);
        if (v < threshold) return eps;
    }
    throw infeasible_error(
        "select_epsilon: resolution floor reached before the bound held",
        "threshold " + std::to_string(threshold) + " unattained down to 4h at resolution " +
            std::to_string(g.resolution()));
}

struct BuildResult {
    std::vector<CompatibleState> states;
    std::vector<double> energy_trace;        // (1/|log eps_k|)||gamma_{eps_k}*phi_k||^2
    std::vector<double> limit_energy_trace;  // same functional on the limit-set raster
    EmbedConfig embed;
};

inline Intervals limit_set(const std::vector<CompatibleState>& states) {
    if (states.empty()) throw h12_error("limit_set: need at least one state");
    Intervals e;
    e.period = 1.0;
    for (const auto& li : states.back().level_sets())
        if (li.value == 1) e.parts.emplace_back(li.lo, li.hi);
    return e;
}

inline SampledField rasterize_limit_set(const std::vector<CompatibleState>& states,
                                        const EmbedConfig& embed) {
    const Intervals e = limit_set(states);
    const Grid g = embed.grid();
    std::vector<double> out(g.size(), 0.0);
    const double h = g.spacing();
    for (auto& [a, b] : e.parts) {
        const auto i0 = static_cast<std::int64_t>(std::ceil((a + embed.offset) / h - 1e-12));
        const auto i1 = static_cast<std::int64_t>(std::ceil((b + embed.offset) / h - 1e-12));
        for (std::int64_t i = std::max<std::int64_t>(0, i0);
             i < std::min(g.resolution(), i1); ++i)
            out[i] = 1.0;
    }
    return SampledField(g, std::move(out));
}

/// The iterative algorithm: alternate select_epsilon, select_refinement_N
/// with tol = eps_k^3 2^{-k}, refine; verify the compatibility bound by
/// direct computation at r in {eps_k, 2eps_k, 4eps_k, 8eps_k} and certify
/// the four compatible-sequence properties at every stage.
/// thresholds[k-1] bounds stage k's normalized energy (default 2^{-k}).
inline BuildResult build_sequence(int depth, std::vector<double> thresholds = {},
                                  EmbedConfig embed = {}, RefineOptions opt = {}) {
    if (depth < 1) throw h12_error("build_sequence: depth >= 1");
    if (thresholds.empty())
        for (int k = 1; k <= depth; ++k) thresholds.push_back(std::pow(2.0, -k));
    if (static_cast<int>(thresholds.size()) != depth)
        throw h12_error("build_sequence: one threshold per stage");
    opt.raster_h = embed.grid().spacing();

    BuildResult out;
    out.embed = embed;
    out.states.push_back(initial_state());
    double prev_eps = 1.0;
    for (int k = 1; k <= depth; ++k) {
        CompatibleState& cur = out.states.back();
        SpectralField spec = transform(rasterize(cur, embed));
        double eps;
        try {
            eps = select_epsilon(cur, thresholds[k - 1], embed, &spec, prev_eps / 2.0);
        } catch (const infeasible_error& e) {
            throw infeasible_error("stage " + std::to_string(k) + ": " + e.raw, e.binding);
        }
        cur.eps = eps;
        cur.cert.smooth_value = smoothed_h12_energy(spec, eps);
        cur.cert.smooth_bound = thresholds[k - 1];
        cur.cert.undecided = cur.undecided_measure();
        cur.cert.undecided_bound = std::pow(0.99, k);
        cur.cert.interval_count = cur.interval_count();
        out.energy_trace.push_back(cur.cert.smooth_value);
        prev_eps = eps;
        if (cur.cert.undecided >= cur.cert.undecided_bound)
            throw infeasible_error(
                "stage " + std::to_string(k) + ": undecided measure bound failed",
                "measured " + std::to_string(cur.cert.undecided) + " vs 0.99^k");

        if (k == depth) break;

        const double tol = std::pow(eps, 3) * std::pow(2.0, -k);
        RefinementPlan plan;
        try {
            plan = select_refinement_N(cur, eps, tol, embed.resolution);
        } catch (const infeasible_error& e) {
            throw infeasible_error("stage " + std::to_string(k + 1) + ": " + e.raw,
                                   e.binding);
        }
        CompatibleState next;
        bool stage_ok = false;
        std::string last_failure, last_binding;
        for (int attempt = 0; attempt < 12 && !stage_ok; ++attempt) {
            next = refine(cur, plan.n_prime, opt);
            if (next.min_feature() < 4.0 * embed.grid().spacing())
                throw infeasible_error(
                    "stage " + std::to_string(k + 1) +
                        ": refined stage features below the raster floor",
                    "min feature " + std::to_string(next.min_feature()) + " < 4h at cap " +
                        std::to_string(embed.resolution));
            // direct compatibility verification
            const SampledField rb = rasterize(next, embed);
            const SampledField ra = rasterize(cur, embed);
            std::vector<double> diff(ra.samples().size());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rb[i] - ra[i];
            const SpectralField dspec =
                transform(SampledField(embed.grid(), std::move(diff)));
            const KernelSpec gamma = KernelSpec::gaussian(1);
            cur.cert.compat.clear();
            bool compat_ok = true;
            for (double r : {eps, 2 * eps, 4 * eps, 8 * eps}) {
                const double v = std::sqrt(convolved_l2_sq(dspec, gamma, r));
                cur.cert.compat.push_back({r, v, tol});
                if (v >= tol) compat_ok = false;
            }
            if (compat_ok) {
                // probe: the refined stage must admit its own epsilon; if the
                // scan fails, a finer N' pushes the oscillation scale down
                try {
                    select_epsilon(next, thresholds[k], embed, nullptr, eps / 2.0);
                    stage_ok = true;
                } catch (const infeasible_error& e) {
                    last_failure = e.raw;
                    last_binding = e.binding;
                }
            } else {
                last_failure = "compatibility bound unattained, measured " +
                               fmt_g(cur.cert.compat.front().value) + " vs tol " + fmt_g(tol);
                last_binding = last_failure + " at N' = " + std::to_string(plan.n_prime);
            }
            if (!stage_ok) {
                if (plan.n_prime * 2 > embed.resolution)
                    throw infeasible_error("stage " + std::to_string(k + 1) + ": " +
                                               last_failure +
                                               " within the resolution cap",
                                           last_binding);
                plan.n_prime *= 2;
            }
        }
        if (!stage_ok)
            throw infeasible_error("stage " + std::to_string(k + 1) + ": " + last_failure,
                                   last_binding);
        if (!next.cert.inclusions_ok)
            throw infeasible_error(
                "stage " + std::to_string(k + 1) + ": inclusion check failed",
                "level-set inclusion violated");
        out.states.push_back(std::move(next));
    }

    const SpectralField espec = transform(rasterize_limit_set(out.states, embed));
    for (const auto& st : out.states)
        out.limit_energy_trace.push_back(smoothed_h12_energy(espec, st.eps));
    return out;
}

}  // namespace h12::cx
