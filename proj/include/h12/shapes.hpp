#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "h12/grid.hpp"

namespace h12 {

/// Disjoint sorted closed-open intervals [a,b) inside [0,L).
struct Intervals {
    double period = 1.0;
    std::vector<std::pair<double, double>> parts;
};

struct Ball {
    std::array<double, 2> center{0.5, 0.5};
    double radius = 0.25;
};

struct Box {
    std::array<double, 2> corner{0.0, 0.0};
    std::array<double, 2> widths{1.0, 1.0};
};

/// Simple counterclockwise polygon.
struct Polygon {
    std::vector<std::array<double, 2>> vertices;
};

/// {x : x . nu0 <= g(pi(x))} over a window, with g a sinusoid profile
/// offset + amp*sin(2*pi*cycles*t/width + phase). nu0 is one of the four
/// axis directions (axis, sign).
struct Subgraph {
    int axis = 1;         // 0: graph over y (normal +-e1), 1: graph over x (normal +-e2)
    double sign = 1.0;    // +1: set below the graph, -1: above
    double window_lo = 0.0;
    double window_hi = 1.0;
    double offset = 0.5;
    double amp = 0.0;
    double cycles = 1.0;
    double phase = 0.0;

    double g(double t) const {
        const double w = window_hi - window_lo;
        return offset + amp * std::sin(2.0 * M_PI * cycles * (t - window_lo) / w + phase);
    }
    double gprime(double t) const {
        const double w = window_hi - window_lo;
        const double k = 2.0 * M_PI * cycles / w;
        return amp * k * std::cos(k * (t - window_lo) + phase);
    }
    double c0_norm() const { return std::fabs(amp); }
    double c1_norm() const {
        return std::fabs(amp) * 2.0 * M_PI * cycles / (window_hi - window_lo);
    }
};

/// Binary raster treated as a set; perimeter is only an estimate.
struct Bitmap {
    Grid grid;
    std::vector<double> values;  // 0/1
};

using ShapeSet = std::variant<Intervals, Ball, Box, Polygon, Subgraph, Bitmap>;

struct PerimeterResult {
    double value = 0.0;
    bool exact = true;
};

struct BoundaryElement {
    double weight;                 // segment length / arc weight
    std::array<double, 2> normal;  // outward unit normal
};

namespace detail {

inline double polygon_area(const Polygon& p) {
    double a = 0.0;
    const auto& v = p.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p0 = v[i];
        const auto& p1 = v[(i + 1) % v.size()];
        a += p0[0] * p1[1] - p1[0] * p0[1];
    }
    return 0.5 * a;
}

inline bool point_in_polygon(const Polygon& p, double x, double y) {
    bool in = false;
    const auto& v = p.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i][1] > y) != (v[j][1] > y)) {
            const double xi =
                v[j][0] + (y - v[j][1]) / (v[i][1] - v[j][1]) * (v[i][0] - v[j][0]);
            if (x < xi) in = !in;
        }
    }
    return in;
}

/// Simpson integral of f on [a,b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n = 2048) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace detail

inline double measure(const ShapeSet& shape) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Intervals>) {
                double m = 0.0;
                for (auto& [a, b] : s.parts) m += b - a;
                return m;
            } else if constexpr (std::is_same_v<T, Ball>) {
                return M_PI * s.radius * s.radius;
            } else if constexpr (std::is_same_v<T, Box>) {
                return s.widths[0] * s.widths[1];
            } else if constexpr (std::is_same_v<T, Polygon>) {
                return detail::polygon_area(s);
            } else if constexpr (std::is_same_v<T, Subgraph>) {
                return detail::simpson([&](double t) { return s.sign > 0 ? s.g(t) : 0.0; },
                                       s.window_lo, s.window_hi);
            } else {
                double c = 0.0;
                for (double v : s.values) c += v;
                return c * std::pow(s.grid.spacing(), 2);
            }
        },
        shape);
}

inline PerimeterResult perimeter(const ShapeSet& shape) {
    return std::visit(
        [](const auto& s) -> PerimeterResult {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Intervals>) {
                return {2.0 * static_cast<double>(s.parts.size()), true};
            } else if constexpr (std::is_same_v<T, Ball>) {
                return {2.0 * M_PI * s.radius, true};
            } else if constexpr (std::is_same_v<T, Box>) {
                return {2.0 * (s.widths[0] + s.widths[1]), true};
            } else if constexpr (std::is_same_v<T, Polygon>) {
                double p = 0.0;
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    const auto& a = s.vertices[i];
                    const auto& b = s.vertices[(i + 1) % s.vertices.size()];
                    p += std::hypot(b[0] - a[0], b[1] - a[1]);
                }
                return {p, true};
            } else if constexpr (std::is_same_v<T, Subgraph>) {
                const double arc = detail::simpson(
                    [&](double t) { return std::hypot(1.0, s.gprime(t)); }, s.window_lo,
                    s.window_hi);
                return {arc, true};
            } else {
                // edge count times h; flagged as an estimate
                const std::int64_t n = s.grid.resolution();
                std::int64_t edges = 0;
                auto at = [&](std::int64_t i, std::int64_t j) {
                    return s.values[((i + n) % n) * n + ((j + n) % n)] > 0.5;
                };
                for (std::int64_t i = 0; i < n; ++i)
                    for (std::int64_t j = 0; j < n; ++j)
                        if (at(i, j)) {
                            if (!at(i + 1, j)) ++edges;
                            if (!at(i - 1, j)) ++edges;
                            if (!at(i, j + 1)) ++edges;
                            if (!at(i, j - 1)) ++edges;
                        }
                return {static_cast<double>(edges) * s.grid.spacing(), false};
            }
        },
        shape);
}

/// Pixel-center rasterization: a cell belongs to E iff its center does.
inline SampledField rasterize(const ShapeSet& shape, const Grid& grid) {
    const std::int64_t n = grid.resolution();
    const double L = grid.period();
    std::vector<double> out(grid.size(), 0.0);

    if (const auto* iv = std::get_if<Intervals>(&shape)) {
        if (grid.dimension() != 1) throw h12_error("rasterize: Intervals need a 1-D grid");
        for (auto& [a, b] : iv->parts) {
            if (a < 0.0 || b > L || a >= b) throw margin_error("rasterize: interval outside [0,L)");
            for (std::int64_t i = 0; i < n; ++i) {
                const double x = (i + 0.5) * grid.spacing();
                if (x >= a && x < b) out[i] = 1.0;
            }
        }
        return SampledField(grid, std::move(out));
    }
    if (grid.dimension() != 2) throw h12_error("rasterize: 2-D shape needs a 2-D grid");

    auto bbox_check = [&](double lo0, double hi0, double lo1, double hi1) {
        if (lo0 < 0.0 || lo1 < 0.0 || hi0 > L || hi1 > L)
            throw margin_error("rasterize: shape does not fit inside [0,L)^2");
    };

    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                bbox_check(s.center[0] - s.radius, s.center[0] + s.radius,
                           s.center[1] - s.radius, s.center[1] + s.radius);
                const double r2 = s.radius * s.radius;
                for (std::int64_t i = 0; i < n; ++i) {
                    const double x = (i + 0.5) * grid.spacing();
                    for (std::int64_t j = 0; j < n; ++j) {
                        const double y = (j + 0.5) * grid.spacing();
                        const double dx = x - s.center[0], dy = y - s.center[1];
                        if (dx * dx + dy * dy <= r2) out[i * n + j] = 1.0;
                    }
                }
            } else if constexpr (std::is_same_v<T, Box>) {
                bbox_check(s.corner[0], s.corner[0] + s.widths[0], s.corner[1],
                           s.corner[1] + s.widths[1]);
                for (std::int64_t i = 0; i < n; ++i) {
                    const double x = (i + 0.5) * grid.spacing();
                    if (x < s.corner[0] || x >= s.corner[0] + s.widths[0]) continue;
                    for (std::int64_t j = 0; j < n; ++j) {
                        const double y = (j + 0.5) * grid.spacing();
                        if (y >= s.corner[1] && y < s.corner[1] + s.widths[1])
                            out[i * n + j] = 1.0;
                    }
                }
            } else if constexpr (std::is_same_v<T, Polygon>) {
                double lo0 = L, hi0 = 0, lo1 = L, hi1 = 0;
                for (auto& v : s.vertices) {
                    lo0 = std::min(lo0, v[0]); hi0 = std::max(hi0, v[0]);
                    lo1 = std::min(lo1, v[1]); hi1 = std::max(hi1, v[1]);
                }
                bbox_check(lo0, hi0, lo1, hi1);
                for (std::int64_t i = 0; i < n; ++i) {
                    const double x = (i + 0.5) * grid.spacing();
                    for (std::int64_t j = 0; j < n; ++j) {
                        const double y = (j + 0.5) * grid.spacing();
                        if (detail::point_in_polygon(s, x, y)) out[i * n + j] = 1.0;
                    }
                }
            } else if constexpr (std::is_same_v<T, Subgraph>) {
                bbox_check(s.window_lo, s.window_hi, s.offset - std::fabs(s.amp),
                           s.offset + std::fabs(s.amp));
                // axis == 1: set is {x2 <= g(x1)} (first index parametrizes the graph)
                for (std::int64_t i = 0; i < n; ++i) {
                    const double t = (i + 0.5) * grid.spacing();
                    if (t < s.window_lo || t >= s.window_hi) continue;
                    const double gv = s.g(t);
                    for (std::int64_t j = 0; j < n; ++j) {
                        const double u = (j + 0.5) * grid.spacing();
                        const bool inside = s.sign > 0 ? (u <= gv) : (u >= gv);
                        if (!inside) continue;
                        if (s.axis == 1) out[i * n + j] = 1.0;
                        else out[j * n + i] = 1.0;
                    }
                }
            } else if constexpr (std::is_same_v<T, Bitmap>) {
                if (!(s.grid == grid)) throw h12_error("rasterize: bitmap grid mismatch");
                out = s.values;
            } else {
                throw h12_error("rasterize: unsupported variant for this grid");
            }
        },
        shape);
    return SampledField(grid, std::move(out));
}

/// Boundary decomposition (weight, outward unit normal); sum of weights is
/// the perimeter. Ball uses uniform-angle quadrature with
/// M = max(64, ceil(2 pi R / h)) nodes; h defaults to R/64 scale if no grid
/// is in play.
inline std::vector<BoundaryElement> boundary_normals(const ShapeSet& shape,
                                                     std::optional<double> h = std::nullopt) {
    return std::visit(
        [&](const auto& s) -> std::vector<BoundaryElement> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Box>) {
                const double w = s.widths[0], ht = s.widths[1];
                return {{ht, {1.0, 0.0}}, {ht, {-1.0, 0.0}}, {w, {0.0, 1.0}}, {w, {0.0, -1.0}}};
            } else if constexpr (std::is_same_v<T, Polygon>) {
                std::vector<BoundaryElement> out;
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    const auto& a = s.vertices[i];
                    const auto& b = s.vertices[(i + 1) % s.vertices.size()];
                    const double dx = b[0] - a[0], dy = b[1] - a[1];
                    const double len = std::hypot(dx, dy);
                    // ccw orientation: outward normal is the right-hand rotation
                    out.push_back({len, {dy / len, -dx / len}});
                }
                return out;
            } else if constexpr (std::is_same_v<T, Ball>) {
                const double step = h.value_or(s.radius / 64.0);
                const std::int64_t m = std::max<std::int64_t>(
                    64, static_cast<std::int64_t>(std::ceil(2.0 * M_PI * s.radius / step)));
                std::vector<BoundaryElement> out;
                out.reserve(m);
                const double w = 2.0 * M_PI * s.radius / static_cast<double>(m);
                for (std::int64_t k = 0; k < m; ++k) {
                    const double th = 2.0 * M_PI * (k + 0.5) / static_cast<double>(m);
                    out.push_back({w, {std::cos(th), std::sin(th)}});
                }
                return out;
            } else if constexpr (std::is_same_v<T, Subgraph>) {
                const int nodes = 4096;
                const double dt = (s.window_hi - s.window_lo) / nodes;
                std::vector<BoundaryElement> out;
                out.reserve(nodes);
                for (int k = 0; k < nodes; ++k) {
                    const double t = s.window_lo + (k + 0.5) * dt;
                    const double gp = s.gprime(t);
                    const double len = std::hypot(1.0, gp);
                    // outward = away from the set; for sign=+1 (set below) it points up
                    std::array<double, 2> nv;
                    if (s.axis == 1)
                        nv = {-gp * s.sign / len, s.sign / len};
                    else
                        nv = {s.sign / len, -gp * s.sign / len};
                    out.push_back({len * dt, nv});
                }
                return out;
            } else {
                throw h12_error("boundary_normals: unsupported for this variant");
            }
        },
        shape);
}

/// Rank-one raster of the Cartesian square E x E of a 1-D interval set:
/// outer product of the 1-D raster with itself.
inline SampledField cartesian_square(const Intervals& e, const Grid& grid2d) {
    if (grid2d.dimension() != 2) throw h12_error("cartesian_square: need a 2-D grid");
    Grid line(1, grid2d.period(), grid2d.resolution());
    const SampledField u1 = rasterize(ShapeSet(e), line);
    const std::int64_t n = grid2d.resolution();
    std::vector<double> out(grid2d.size());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) out[i * n + j] = u1[i] * u1[j];
    return SampledField(grid2d, std::move(out));
}

}  // namespace h12
