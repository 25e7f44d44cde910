#include <doctest.h>

#include <cmath>

#include "spsim/model.hpp"

using namespace spsim;

TEST_SUITE("model") {

TEST_CASE("rabi envelope peak and tails") {
    PulseParams pulse(1.0, 0.0, M_PI);
    // peak for a pi pulse: sqrt(pi/2) / sigma
    CHECK(rabi_envelope(pulse, 0.0) == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-14));
    CHECK(rabi_envelope(pulse, 10.0) < 2e-22 * pulse.peak());
    CHECK(rabi_envelope(pulse, -10.0) < 2e-22 * pulse.peak());
}

TEST_CASE("rabi envelope integrates to the pulse area") {
    for (double sigma : {0.3, 1.0, 4.0}) {
        for (double area : {M_PI, 0.5 * M_PI}) {
            PulseParams pulse(sigma, 0.0, area);
            // fine trapezoid over +-12 sigma
            const int m = 200001;
            const double lo = -12.0 * sigma, hi = 12.0 * sigma;
            const double h = (hi - lo) / (m - 1);
            double acc = 0.0;
            for (int i = 0; i < m; ++i) {
                const double f = rabi_envelope(pulse, lo + i * h);
                acc += (i == 0 || i == m - 1) ? 0.5 * f : f;
            }
            CHECK(acc * h == doctest::Approx(area).epsilon(1e-8));
        }
    }
}

TEST_CASE("build_grid follows the margin rules") {
    EmitterParams em(1.0);
    {
        PulseParams p = centered_pulse(em, 0.1);
        TimeGrid g = build_grid(em, p, 1024);
        CHECK(p.t0 == doctest::Approx(1.0));
        CHECK(g.t_start == 0.0);
        CHECK(g.t_end == doctest::Approx(11.0));
        CHECK(g.n == 1024);
    }
    {
        PulseParams p = centered_pulse(em, 10.0);
        TimeGrid g = build_grid(em, p, 1024);
        CHECK(p.t0 == doctest::Approx(60.0));
        CHECK(g.t_end == doctest::Approx(120.0));
    }
    CHECK_THROWS_AS(build_grid(em, centered_pulse(em, 0.1), 32), std::invalid_argument);
}

TEST_CASE("pulse is contained in the grid for all widths") {
    EmitterParams em(1.0);
    for (double sg = 1e-3; sg <= 10.0; sg *= 3.1623) {
        PulseParams p = centered_pulse(em, sg);
        TimeGrid g = build_grid(em, p, 128);
        CHECK(rabi_envelope(p, g.t_start) < 1e-7 * p.peak());
        CHECK(rabi_envelope(p, g.t_end) < 1e-7 * p.peak());
    }
}

TEST_CASE("time grid spacing and weights") {
    TimeGrid g(0.0, 10.0, 11);
    CHECK(g.dt == doctest::Approx(1.0));
    CHECK(g.t(3) == doctest::Approx(3.0));
    CHECK(g.weights().sum() == doctest::Approx(10.0).epsilon(1e-14));
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 8), std::invalid_argument);
}

TEST_CASE("leakage parameter normalization and validation") {
    LeakageParams leak(0.5, 3.0 * M_PI);  // wraps to pi
    CHECK(leak.phase == doctest::Approx(M_PI));
    CHECK(std::abs(leak.factor() - std::polar(0.5, -M_PI)) < 1e-14);
    CHECK_THROWS_AS(LeakageParams(1.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(LeakageParams(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(EmitterParams(0.0), std::invalid_argument);
    CHECK_THROWS_AS(EmitterParams(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("leaked field definition") {
    EmitterParams em(1.0);
    PulseParams p = centered_pulse(em, 1.0);
    TimeGrid g = build_grid(em, p, 256);

    SUBCASE("no leakage gives an all-zero field") {
        LeakedField f = leaked_field(LeakageParams(0.0, 0.3), p, em, g);
        CHECK(f.samples.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("unit leakage at the pulse center") {
        LeakedField f = leaked_field(LeakageParams(1.0, 0.0), p, em, g);
        // value at the node closest to t0
        int i0 = static_cast<int>(std::round((p.t0 - g.t_start) / g.dt));
        CHECK(std::abs(f.samples(i0)) ==
              doctest::Approx(rabi_envelope(p, g.t(i0)) / 2.0).epsilon(1e-14));
    }
    SUBCASE("every sample carries phase -theta") {
        const double theta = 1.1;
        LeakedField f = leaked_field(LeakageParams(0.4, theta), p, em, g);
        for (int i = 0; i < g.n; i += 17) {
            if (std::abs(f.samples(i)) < 1e-300) continue;
            CHECK(std::arg(f.samples(i)) == doctest::Approx(-theta).epsilon(1e-12));
        }
    }
}

TEST_CASE("leaked photon number closed form vs quadrature") {
    // integral |E'|^2 dt = |x|^2 area^2 / (8 sqrt(pi) sigma gamma)
    EmitterParams em(1.0);
    for (double sg : {0.01, 0.1}) {
        PulseParams p = centered_pulse(em, sg);
        LeakageParams leak(0.1, 0.7);
        const double expected = leaked_photon_number(leak, p, em);

        const int m = 400001;
        const double lo = p.t0 - 10.0 * sg, hi = p.t0 + 10.0 * sg;
        const double h = (hi - lo) / (m - 1);
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const double om = rabi_envelope(p, lo + i * h);
            const double v = std::norm(leak.factor() * om / 2.0);
            acc += (i == 0 || i == m - 1) ? 0.5 * v : v;
        }
        CHECK(acc * h == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("formulas are invariant under joint rate/time rescaling") {
    // gamma -> s gamma, times -> t/s leaves the dimensionless shape intact
    const double s = 3.7;
    EmitterParams em1(1.0), em2(s);
    PulseParams p1 = centered_pulse(em1, 0.2), p2 = centered_pulse(em2, 0.2 / s);
    TimeGrid g1 = build_grid(em1, p1, 128), g2 = build_grid(em2, p2, 128);
    LeakageParams leak(0.3, 0.9);
    LeakedField f1 = leaked_field(leak, p1, em1, g1);
    LeakedField f2 = leaked_field(leak, p2, em2, g2);
    // photon number integrals match: |E'|^2 dt is dimensionless
    const double n1 = (g1.weights().array() * f1.samples.array().abs2()).sum();
    const double n2 = (g2.weights().array() * f2.samples.array().abs2()).sum();
    CHECK(n1 == doctest::Approx(n2).epsilon(1e-12));
}

}  // TEST_SUITE
