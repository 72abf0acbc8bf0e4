#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "h12/halfspace_density.hpp"

using namespace h12;

namespace {

// independent high-accuracy oracle for c_f of the phi kernel via the
// spectral form (2 pi)^{-1} int |phi_hat(t)|^2 / t^2 dt, Simpson quadrature
double cf_spectral_oracle() {
    auto integrand = [](double t) {
        return (std::exp(-t * t) - std::exp(-4.0 * t * t)) / t;
    };
    const int n = 200000;
    const double a = 1e-9, b = 30.0;
    const double h = (b - a) / n;
    double acc = integrand(a) + integrand(b);
    for (int i = 1; i < n; ++i) acc += integrand(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0 / M_PI;
}

std::array<double, 2> unit(double th) { return {std::cos(th), std::sin(th)}; }

}  // namespace

TEST_CASE("c_f for phi: positivity and the two mutually-oracle routes") {
    const KernelSpec phi1 = KernelSpec::phi(1);
    const double fh = F_via_halfspace(phi1, {1.0, 0.0});
    const double fm = F_via_marginal(phi1, {1.0, 0.0});
    CHECK(fh > 0.0);
    CHECK(std::fabs(fh - fm) / fh < 1e-4);
    // spectral oracle: ln 2 / pi for this kernel
    const double oracle = cf_spectral_oracle();
    CHECK(oracle == Catch::Approx(std::log(2.0) / M_PI).epsilon(1e-8));
    CHECK(fh == Catch::Approx(oracle).epsilon(1e-4));
    CHECK(c_f(phi1) == Catch::Approx(0.2206356001526516).epsilon(1e-4));
}

TEST_CASE("radial kernels: F is direction-independent") {
    const KernelSpec phi2 = KernelSpec::phi(2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    const double ref = F_via_marginal(phi2, {1.0, 0.0});
    for (int i = 0; i < 16; ++i) {
        const double v = F_via_marginal(phi2, unit(uni(rng)));
        CHECK(std::fabs(v - ref) / ref < 1e-6);
    }
    // the 2-D phi shares the 1-D constant (radial reduction)
    CHECK(ref == Catch::Approx(std::log(2.0) / M_PI).epsilon(1e-4));
}

TEST_CASE("two-route agreement for phi in 2-D on 8 normals") {
    const KernelSpec phi2 = KernelSpec::phi(2);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    for (int i = 0; i < 8; ++i) {
        const auto nu = unit(uni(rng));
        const double fm = F_via_marginal(phi2, nu);
        const double fh = F_via_halfspace(phi2, nu);
        CHECK(std::fabs(fm - fh) / std::max(fm, fh) < 1e-4);
    }
}

TEST_CASE("kernel scaling: F scales quadratically") {
    const double lambda = 1.7;
    const KernelSpec phi1 = KernelSpec::phi(1);
    const KernelSpec scaled = KernelSpec::custom(1, [lambda](std::array<double, 2> xi) {
        const double a = std::fabs(xi[0]);
        const double q = a * (std::exp(-a * a) - std::exp(-4.0 * a * a));
        return lambda * std::sqrt(std::max(q, 0.0));
    });
    const double base = F_via_marginal(phi1, {1.0, 0.0});
    const double big = F_via_marginal(scaled, {1.0, 0.0});
    CHECK(big == Catch::Approx(lambda * lambda * base).epsilon(1e-10));
}

TEST_CASE("mass-one kernels are rejected") {
    CHECK_THROWS_AS(F_via_halfspace(KernelSpec::gaussian(1), {1.0, 0.0}), h12_error);
    CHECK_THROWS_AS(F_via_marginal(KernelSpec::psi(2), {0.0, 1.0}), h12_error);
}

TEST_CASE("half-space profile decays away from the interface") {
    // f * 1_H tends to 0 far from the interface for mean-zero kernels;
    // probed through the tail gate of the halfspace route (it passes)
    CHECK_NOTHROW(F_via_halfspace(KernelSpec::phi(1), {1.0, 0.0}));
}

TEST_CASE("quadrature invariance under resolution doubling") {
    const KernelSpec phi1 = KernelSpec::phi(1);
    const double a = F_via_marginal(phi1, {1.0, 0.0}, Grid(1, 4096.0, std::int64_t(1) << 20));
    const double b = F_via_marginal(phi1, {1.0, 0.0}, Grid(1, 4096.0, std::int64_t(1) << 21));
    CHECK(std::fabs(a - b) / a < 1e-6);
}

TEST_CASE("F(nu) = F(-nu) for even kernels") {
    const KernelSpec phi2 = KernelSpec::phi(2);
    const auto nu = unit(0.83);
    const double a = F_via_marginal(phi2, nu);
    const double b = F_via_marginal(phi2, {-nu[0], -nu[1]});
    CHECK(a == Catch::Approx(b).epsilon(1e-12));
}

TEST_CASE("boundary integral") {
    const KernelSpec phi2 = KernelSpec::phi(2);
    DensityProfile prof(phi2);
    const double F = prof.F({1.0, 0.0});

    SECTION("unit square: 4 F") {
        const double bi = boundary_integral(ShapeSet(Box{{0.5, 0.5}, {1.0, 1.0}}), phi2);
        CHECK(bi == Catch::Approx(4.0 * F).epsilon(1e-10));
    }

    SECTION("ball: 2 pi R F") {
        const double R = 0.7;
        const double bi = boundary_integral(ShapeSet(Ball{{1.0, 1.0}, R}), phi2);
        CHECK(bi == Catch::Approx(2.0 * M_PI * R * F).epsilon(1e-6));
    }

    SECTION("gentle sinusoid subgraph: within C eps of width * F(nu0)") {
        Subgraph s;
        s.window_lo = 0.0;
        s.window_hi = 1.0;
        s.offset = 0.5;
        s.amp = 0.01;
        s.cycles = 1.0;
        const double bi = boundary_integral(ShapeSet(s), phi2);
        // radial kernel: the quadrature oracle is arclength * F
        const double arc = perimeter(ShapeSet(s)).value;
        CHECK(bi == Catch::Approx(arc * F).epsilon(1e-8));
        CHECK(std::fabs(bi - 1.0 * F) <= 3.0 * 0.01 * F);
    }
}

TEST_CASE("lipschitz bound") {
    const Grid mgrid(2, 64.0, 2048);
    const KernelSpec phi2 = KernelSpec::phi(2);

    SECTION("nu = nu'") {
        const auto chk = lipschitz_check(phi2, {1.0, 0.0}, {1.0, 0.0}, mgrid);
        CHECK(chk.lhs == Catch::Approx(0.0).margin(1e-12));
        CHECK(chk.ok);
    }

    SECTION("radial kernel: lhs vanishes for all pairs") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
        const auto chk = lipschitz_check(phi2, unit(uni(rng)), unit(uni(rng)), mgrid);
        CHECK(chk.lhs < 1e-6 * chk.bound + 1e-12);
        CHECK(chk.ok);
    }

    SECTION("anisotropic custom kernel obeys the moment bound") {
        // even, mean-zero, smooth; F genuinely varies with nu
        const KernelSpec k = KernelSpec::custom(2, [](std::array<double, 2> xi) {
            const double q2 = xi[0] * xi[0] + xi[1] * xi[1];
            return xi[0] * xi[0] * std::fabs(xi[1]) * std::exp(-q2);
        });
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
        bool varied = false;
        const double f0 = F_via_marginal(k, {1.0, 0.0});
        for (int i = 0; i < 8; ++i) {
            const auto nu = unit(uni(rng)), nup = unit(uni(rng));
            const auto chk = lipschitz_check(k, nu, nup, mgrid);
            CHECK(chk.ok);
            if (std::fabs(F_via_marginal(k, nu) - f0) > 1e-6) varied = true;
        }
        CHECK(varied);
    }
}
