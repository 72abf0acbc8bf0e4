#include <catch2/catch_amalgamated.hpp>

#include "h12/shapes.hpp"

using namespace h12;

TEST_CASE("exact perimeter and measure") {
    const ShapeSet square = Box{{0.5, 0.5}, {1.0, 1.0}};
    CHECK(perimeter(square).value == Catch::Approx(4.0));
    CHECK(measure(square) == Catch::Approx(1.0));

    const ShapeSet ball = Ball{{2.0, 2.0}, 1.0};
    CHECK(perimeter(ball).value == Catch::Approx(2.0 * M_PI));
    CHECK(measure(ball) == Catch::Approx(M_PI));

    Intervals two;
    two.parts = {{0.1, 0.2}, {0.5, 0.7}};
    CHECK(perimeter(ShapeSet(two)).value == Catch::Approx(4.0));  // four endpoints
    CHECK(measure(ShapeSet(two)) == Catch::Approx(0.3));

    const ShapeSet tri = Polygon{{{0, 0}, {1, 0}, {0, 1}}};
    CHECK(perimeter(tri).value == Catch::Approx(2.0 + std::sqrt(2.0)));
    CHECK(measure(tri) == Catch::Approx(0.5));
}

TEST_CASE("rasterize") {
    const Grid g1(1, 1.0, 256);
    Intervals half;
    half.parts = {{0.0, 0.5}};
    const SampledField u = rasterize(ShapeSet(half), g1);
    double mean = 0.0;
    for (std::int64_t i = 0; i < 256; ++i) mean += u[i];
    CHECK(mean / 256 == Catch::Approx(0.5));  // exactly half the pixels

    const Grid g2(2, 1.0, 1024);
    const Ball b{{0.5, 0.5}, 1.0 / 8.0};
    const SampledField ub = rasterize(ShapeSet(b), g2);
    CHECK(measure(ShapeSet(Bitmap{g2, ub.samples()})) ==
          Catch::Approx(M_PI / 64.0).epsilon(0.01));

    Intervals empty;
    const SampledField ue = rasterize(ShapeSet(empty), g1);
    for (std::int64_t i = 0; i < 256; ++i) CHECK(ue[i] == 0.0);

    CHECK_THROWS_AS(rasterize(ShapeSet(Ball{{0.1, 0.5}, 0.2}), g2), margin_error);
}

TEST_CASE("raster measure error bounded by perimeter times h, rate O(h)") {
    const Ball b{{0.5, 0.5}, 0.2};
    const double exact = measure(ShapeSet(b));
    double prev_err = 1e9;
    for (std::int64_t n : {256, 512, 1024}) {
        const Grid g(2, 1.0, n);
        const SampledField u = rasterize(ShapeSet(b), g);
        double count = 0.0;
        for (double v : u.samples()) count += v;
        const double err = std::fabs(count * g.spacing() * g.spacing() - exact);
        CHECK(err <= perimeter(ShapeSet(b)).value * g.spacing());
        CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("boundary normals") {
    const ShapeSet square = Box{{0.5, 0.5}, {1.0, 1.0}};
    const auto els = boundary_normals(square);
    REQUIRE(els.size() == 4);
    double total = 0.0;
    for (const auto& e : els) {
        total += e.weight;
        CHECK(std::hypot(e.normal[0], e.normal[1]) == Catch::Approx(1.0));
    }
    CHECK(total == Catch::Approx(4.0));

    const ShapeSet ball = Ball{{1.0, 1.0}, 0.7};
    double arc = 0.0;
    for (const auto& e : boundary_normals(ball)) arc += e.weight;
    CHECK(arc == Catch::Approx(2.0 * M_PI * 0.7).margin(1e-10));

    // flat subgraph: single normal nu0, weight = window width
    Subgraph flat;
    flat.window_lo = 0.0;
    flat.window_hi = 2.0;
    flat.offset = 1.0;
    flat.amp = 0.0;
    double w = 0.0;
    for (const auto& e : boundary_normals(ShapeSet(flat))) {
        w += e.weight;
        CHECK(e.normal[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(e.normal[1] == Catch::Approx(1.0));
    }
    CHECK(w == Catch::Approx(2.0));

    CHECK_THROWS_AS(boundary_normals(ShapeSet(Intervals{})), h12_error);
}

TEST_CASE("polygon normals are rotation-equivariant under 90 degrees") {
    const Polygon p{{{0.2, 0.2}, {0.6, 0.3}, {0.5, 0.7}}};
    Polygon q;  // rotate 90 degrees about (0.5, 0.5): (x,y) -> (1-y, x)
    for (auto& v : p.vertices) q.vertices.push_back({1.0 - v[1], v[0]});
    const auto ep = boundary_normals(ShapeSet(p));
    const auto eq = boundary_normals(ShapeSet(q));
    REQUIRE(ep.size() == eq.size());
    for (std::size_t i = 0; i < ep.size(); ++i) {
        CHECK(eq[i].weight == Catch::Approx(ep[i].weight));
        CHECK(eq[i].normal[0] == Catch::Approx(-ep[i].normal[1]).margin(1e-12));
        CHECK(eq[i].normal[1] == Catch::Approx(ep[i].normal[0]).margin(1e-12));
    }
}

TEST_CASE("cartesian square is the rank-one raster") {
    Intervals e;
    e.parts = {{0.0, 0.5}};
    const Grid g2(2, 1.0, 64);
    const SampledField u2 = cartesian_square(e, g2);
    const Grid g1(1, 1.0, 64);
    const SampledField u1 = rasterize(ShapeSet(e), g1);
    for (std::int64_t i = 0; i < 64; ++i)
        for (std::int64_t j = 0; j < 64; ++j) CHECK(u2.at(i, j) == u1[i] * u1[j]);
    double mass = 0.0;
    for (double v : u2.samples()) mass += v;
    CHECK(mass * g2.spacing() * g2.spacing() == Catch::Approx(0.25));
}

TEST_CASE("bitmap perimeter is an estimate") {
    const Grid g(2, 1.0, 16);
    std::vector<double> v(256, 0.0);
    v[5 * 16 + 5] = 1.0;  // one pixel: 4 edges
    const auto p = perimeter(ShapeSet(Bitmap{g, v}));
    CHECK_FALSE(p.exact);
    CHECK(p.value == Catch::Approx(4.0 * g.spacing()));
}
