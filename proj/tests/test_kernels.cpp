#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "h12/convolve.hpp"
#include "h12/kernels.hpp"
#include "h12/norms.hpp"

using namespace h12;

TEST_CASE("phi multiplier closed form") {
    const KernelSpec phi = KernelSpec::phi(1);
    CHECK(phi.radial(0.0) == 0.0);
    // sqrt(e^-1 - e^-4), cross-checked by high-precision evaluation
    CHECK(phi.radial(1.0) == Catch::Approx(0.5912392090200955).epsilon(1e-12));
    CHECK(phi.radial(1.0) ==
          Catch::Approx(std::sqrt(std::exp(-1.0) - std::exp(-4.0))).epsilon(1e-14));
    // squared form matches |xi|(e^{-xi^2} - e^{-4 xi^2}) pointwise
    for (double a : {0.1, 0.7, 2.3}) {
        const double m = phi.radial(a);
        CHECK(m * m == Catch::Approx(a * (std::exp(-a * a) - std::exp(-4 * a * a)))
                           .epsilon(1e-13));
    }
}

TEST_CASE("psi plateau and support") {
    const KernelSpec psi = KernelSpec::psi(2);
    CHECK(psi.radial(0.25) == 1.0);
    CHECK(psi.radial(0.5) == 1.0);
    CHECK(psi.radial(2.0) == 0.0);
    CHECK(psi.radial(1.0) == 0.0);
    // smooth and nonincreasing in between
    double prev = 1.0;
    for (int i = 1; i <= 50; ++i) {
        const double v = psi.radial(0.5 + 0.5 * i / 50.0);
        CHECK(v <= prev + 1e-15);
        CHECK(v >= 0.0);
        prev = v;
    }
}

TEST_CASE("gaussian space samples match the periodized closed form") {
    const Grid g(1, 40.0, 1 << 12);
    const SampledField f = space_samples(KernelSpec::gaussian(1), g);
    for (std::int64_t i = 0; i < g.resolution(); i += 37) {
        double x = g.coord(i);
        if (x > 20.0) x -= 40.0;
        // periodization is e^-200 here; the plain density suffices
        const double expect = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        CHECK(f[i] == Catch::Approx(expect).margin(1e-8));
    }
}

TEST_CASE("phi space samples: cancellation and decay") {
    const Grid g(1, 256.0, 1 << 15);
    const SampledField f = space_samples(KernelSpec::phi(1), g);
    double mass = 0.0;
    for (std::int64_t i = 0; i < g.resolution(); ++i) mass += f[i];
    mass *= g.spacing();
    CHECK(std::fabs(mass) < 1e-8);

    // |phi(x)| (1+|x|)^{3/2+d} bounded by <= 10x its value at |x| = 2
    const double d = 1.0;
    auto weighted = [&](std::int64_t i) {
        double x = g.coord(i);
        if (x > 128.0) x -= 256.0;
        return std::fabs(f[i]) * std::pow(1.0 + std::fabs(x), 1.5 + d);
    };
    const std::int64_t i2 = static_cast<std::int64_t>(2.0 / g.spacing());
    const double ref = weighted(i2);
    double sup = 0.0;
    for (std::int64_t i = 0; i < g.resolution(); ++i) sup = std::max(sup, weighted(i));
    CHECK(sup <= 10.0 * ref);
}

TEST_CASE("moment report") {
    const Grid g(1, 256.0, 1 << 15);
    const MomentReport mg = moment_report(KernelSpec::gaussian(1), g);
    CHECK(mg.mass == Catch::Approx(1.0).margin(1e-8));

    const MomentReport mp = moment_report(KernelSpec::phi(1), g);
    CHECK(std::fabs(mp.mass) < 1e-8);
    CHECK(std::isfinite(mp.abs_first_moment));

    // stability under doubling L at fixed h
    const Grid g2(1, 512.0, 1 << 16);
    const MomentReport mp2 = moment_report(KernelSpec::phi(1), g2);
    CHECK(std::fabs(mp2.abs_first_moment - mp.abs_first_moment) / mp.abs_first_moment <
          0.02);
}

TEST_CASE("marginals") {
    const Grid line(1, 64.0, 1 << 12);
    // gaussian: any direction gives the 1-D standard gaussian
    const SampledField mg = marginal(KernelSpec::gaussian(2), {0.6, 0.8}, line);
    for (std::int64_t i = 0; i < line.resolution(); i += 53) {
        double x = line.coord(i);
        if (x > 32.0) x -= 64.0;
        CHECK(mg[i] == Catch::Approx(std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI))
                           .margin(1e-8));
    }
    // radial phi: axis marginals identical
    const SampledField m1 = marginal(KernelSpec::phi(2), {1.0, 0.0}, line);
    const SampledField m2 = marginal(KernelSpec::phi(2), {0.0, 1.0}, line);
    double worst = 0.0, mean = 0.0;
    for (std::int64_t i = 0; i < line.resolution(); ++i) {
        worst = std::max(worst, std::fabs(m1[i] - m2[i]));
        mean += m1[i];
    }
    CHECK(worst < 1e-10);
    CHECK(std::fabs(mean * line.spacing()) < 1e-8);  // inherited cancellation
}

TEST_CASE("multiplier at r xi is exactly what convolve applies") {
    const Grid g(1, 1.0, 256);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    std::vector<double> v(g.size());
    for (auto& x : v) x = gauss(rng);
    const SpectralField spec = transform(SampledField(g, std::move(v)));
    const KernelSpec phi = KernelSpec::phi(1);
    const double r = 0.05;
    const SpectralField conv = convolve_spectrum(spec, phi, r);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const auto expect =
            spec.coefficients()[i] * phi.radial(r * std::fabs(g.frequency(i)));
        CHECK(std::abs(conv.coefficients()[i] - expect) <= 1e-12);
    }
}

TEST_CASE("psi band support bookkeeping") {
    const KernelSpec psi = KernelSpec::psi(1);
    const double r = 0.25;
    const auto band = psi_band_support(r);
    CHECK(band.lo == Catch::Approx(2.0));
    CHECK(band.hi == Catch::Approx(8.0));
    // the multiplier of psi_r - psi_{r/2} vanishes outside (lo, hi)
    for (double xi : {0.0, 1.0, 1.99, 8.01, 20.0}) {
        const double m = psi.radial(r * xi) - psi.radial(r * xi / 2.0);
        CHECK(std::fabs(m) == 0.0);
    }
    bool nonzero_inside = false;
    for (double xi = 2.1; xi < 7.9; xi += 0.1)
        if (std::fabs(psi.radial(r * xi) - psi.radial(r * xi / 2.0)) > 1e-6)
            nonzero_inside = true;
    CHECK(nonzero_inside);
    // bands two octaves apart have disjoint supports, hence exactly
    // orthogonal band differences on any field
    const auto b2 = psi_band_support(r / 4.0);
    CHECK(b2.lo >= band.hi);
    const Grid g(1, 1.0, 4096);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss;
    std::vector<double> v(g.size());
    for (auto& x : v) x = gauss(rng);
    const SpectralField spec = transform(SampledField(g, std::move(v)));
    const double rr = 0.25;
    std::complex<double> inner = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double a = std::fabs(g.frequency(i));
        const double m1 = psi.radial(rr * a) - psi.radial(rr * a / 2.0);
        const double m2 = psi.radial(rr / 4.0 * a) - psi.radial(rr / 8.0 * a);
        inner += m1 * m2 * std::norm(spec.coefficients()[i]);
    }
    CHECK(std::abs(inner) == 0.0);
}

TEST_CASE("domination constant is finite and dominates bands") {
    const double cdom = domination_constant();
    CHECK(std::isfinite(cdom));
    CHECK(cdom > 0.0);
    // pointwise: |psi(t) - psi(2t)|^2 <= C_dom |phi(t)|^2 on [1/4, 1]
    const KernelSpec psi = KernelSpec::psi(1);
    const KernelSpec phi = KernelSpec::phi(1);
    for (double t = 0.251; t < 1.0; t += 0.003) {
        const double num = psi.radial(t) - psi.radial(2.0 * t);
        const double den = phi.radial(t);
        CHECK(num * num <= cdom * den * den * (1.0 + 1e-9));
    }
}

TEST_CASE("custom kernel escape hatch") {
    // even, mean-zero sampled kernel: anisotropic multiplier
    const KernelSpec k = KernelSpec::custom(2, [](std::array<double, 2> xi) {
        const double q = xi[0] * xi[0] * xi[1] * xi[1];
        return q * std::exp(-(xi[0] * xi[0] + xi[1] * xi[1]));
    });
    CHECK(k.mean_zero());
    CHECK(k.multiplier({1.0, 2.0}) == k.multiplier({-1.0, -2.0}));
}
