#include <doctest.h>

#include <cmath>
#include <numbers>

#include "edgephase/classical.hpp"
#include "edgephase/errors.hpp"
#include "edgephase/fiber.hpp"
#include "edgephase/phases.hpp"
#include "edgephase/profile.hpp"
#include "oracles.hpp"

using namespace edgephase;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("classical") {

TEST_CASE("incidence angle") {
    CHECK(eta_from(9.0, 0.0) == doctest::Approx(kPi / 2));
    CHECK(eta_from(9.0, 1.5) == doctest::Approx(kPi / 3));
    CHECK(eta_from(9.0, -2.999999) > 3.1);
    CHECK_THROWS_AS(eta_from(9.0, 3.0), NoCollision);
    CHECK_THROWS_AS(cap_area(4.0, -2.5), NoCollision);
}

TEST_CASE("cap area") {
    CHECK(cap_area(5.0, 0.0) == doctest::Approx(kPi / 2 * 5.0).epsilon(1e-14));
    CHECK(cap_area(5.0, -std::sqrt(5.0) + 1e-9) == doctest::Approx(kPi * 5.0).epsilon(1e-6));
    for (double k : {-1.2, 0.3, 1.9}) {
        const double E = 5.0;
        const double chord = 2.0 * std::sqrt(E) * std::sin(eta_from(E, k));
        const double fd = -oracle::central_difference([&](double kk) { return cap_area(E, kk); }, k, 1e-5);
        CHECK(std::abs(fd - chord) <= 1e-8);
    }
}

TEST_CASE("Bohr-Sommerfeld residual") {
    for (int n : {0, 3, 20}) CHECK(std::abs(bohr_sommerfeld_residual(n, 0.0) - 0.75) <= 1e-6);
    for (int n : {5, 12, 30}) {
        for (double k : {-2.0, 0.0, 2.0}) {
            const double r = bohr_sommerfeld_residual(n, k);
            CHECK(r >= 0.5);
            CHECK(r <= 1.0);
        }
    }
    CHECK(bohr_sommerfeld_residual(30, 1.0) / 30 < bohr_sommerfeld_residual(5, 1.0) / 5);
}

TEST_CASE("velocity ratio") {
    const auto [q0, c0] = velocity_ratio_check(0, 0.0);
    CHECK(q0 == doctest::Approx(2.0 / std::sqrt(3.0 * kPi)).epsilon(1e-6));
    CHECK(c0 == doctest::Approx(2.0 / kPi).epsilon(1e-14));
    const auto [q20, c20] = velocity_ratio_check(20, 0.0);
    CHECK(std::abs(q20 - c20) / c20 <= 0.002);
}

TEST_CASE("turning-point momentum") {
    CHECK(std::abs(solve_kn(4, kPi / 2)) <= 1e-10);
    const double eta = kPi / 3;
    const double kn = solve_kn(10, eta);
    CHECK(std::abs(kn - std::sqrt(band_energy(10, kn)) * std::cos(eta)) <= 1e-10);

    // scan for the sign change, then interpolate
    auto f = [&](double k) { return k - std::sqrt(band_energy(10, k)) * std::cos(eta); };
    double lo = 0.0;
    double flo = f(lo);
    double root = NAN;
    for (double k = 0.05; k <= 6.0; k += 0.05) {
        const double fk = f(k);
        if ((flo < 0.0) != (fk < 0.0)) {
            double a = lo, b = k, fa = flo;
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            root = 0.5 * (a + b);
            break;
        }
        lo = k;
        flo = fk;
    }
    CHECK(kn == doctest::Approx(root).epsilon(1e-9));
}

TEST_CASE("hop deltas") {
    const HopDeltas zero = hop_deltas(2.0, 1.1, 0.0);
    CHECK(zero.d_span == 0.0);
    CHECK(zero.d_length == 0.0);
    CHECK(zero.d_area == 0.0);
    const HopDeltas half = hop_deltas(1.0, kPi / 2, 1e-3);
    CHECK(std::abs(half.d_span) <= 1e-15);
    CHECK(half.d_length == doctest::Approx(-2e-3).epsilon(1e-12));
    CHECK(half.d_eta == 0.0);
    CHECK_THROWS_AS(hop_deltas(1.0, 1.0, 0.2), CurvatureTooLarge);
}

TEST_CASE("exact geometry of a straight wall") {
    for (double eta : {kPi / 4, kPi / 2, 2 * kPi / 3}) {
        const HopGeometry g = exact_hop_geometry(1.5, eta, 0.0);
        CHECK(g.span == doctest::Approx(2 * 1.5 * std::sin(eta)).epsilon(1e-12));
        CHECK(g.eta_out == doctest::Approx(eta).epsilon(1e-12));
        CHECK(g.length == doctest::Approx(2 * 1.5 * eta).epsilon(1e-12));
    }
}

TEST_CASE("first-order deltas against exact intersection geometry") {
    const double r = 1.0;
    for (double eta : {kPi / 4, kPi / 2, 2 * kPi / 3}) {
        const double kappa = 1e-3;
        const HopDeltas first = hop_deltas(r, eta, kappa);
        const HopDeltas exact = exact_hop_deltas(r, eta, kappa);
        const double scale = kappa * r * r;
        CHECK(std::abs(first.d_length - exact.d_length) <= 0.01 * std::max(std::abs(exact.d_length), scale));
        CHECK(std::abs(first.d_area - exact.d_area) <= 0.01 * std::max(std::abs(exact.d_area), scale * r));
        CHECK(std::abs(first.d_span - exact.d_span) <= 0.01 * std::max(std::abs(exact.d_span), scale));
        const double e3 = std::abs(exact_hop_deltas(r, eta, 1e-3).d_eta);
        const double e4 = std::abs(exact_hop_deltas(r, eta, 1e-4).d_eta);
        CHECK(e3 <= 1e-6);
        CHECK(e4 <= 1e-8);
    }
}

TEST_CASE("semiclassical phase") {
    CHECK(semiclassical_phase(0, kPi / 2, 0.4) == doctest::Approx(-0.4).epsilon(1e-6));
    CHECK(semiclassical_phase(3, 1.0, 0.0) == 0.0);
    const SemiclassicalComparison c = compare_semiclassical(20, kPi / 3, 0.4);
    CHECK(c.rel_gap <= 0.02);
    CHECK(c.phi_quantum == doctest::Approx(phi0(20, c.k_n, make_bump_profile(0.4, 1.0))).epsilon(1e-10));
}

}
