#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isochrone/analytic.hpp"
#include "isochrone/birkhoff.hpp"
#include "isochrone/error.hpp"
#include "support/cases.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>

using namespace isochrone;
using namespace isochrone::birkhoff;
using std::numbers::pi;
namespace ts = testing_support;
using doctest::Approx;

namespace {

const auto kKepler = potential::fromKepler(1);
const auto kHarmonic = potential::fromHarmonic(2);
const auto kHenon = potential::fromHenon(1, 1);

ErrorKind kindOf(auto&& fn)
{
    try {
        fn();
    } catch(const Error& e) {
        return e.kind();
    }
    FAIL("expected an isochrone::Error");
    return ErrorKind::InvalidParams;
}

}  // namespace

TEST_CASE("circular abscissa")
{
    CHECK(circularAbscissa(kKepler, 1.0) == Approx(2).epsilon(1e-14));
    CHECK(circularAbscissa(kHarmonic, 1.0) == Approx(2).epsilon(1e-14));
    // harmonic core with Omega = 1/2: Lambda = Omega r^2, so x_c -> 4 Lambda
    CHECK(circularAbscissa(kHenon, 1e-4) == Approx(4e-4).epsilon(1e-3));
    for(const auto& c : ts::classCases()) {
        for(double lam : c.lambdas) {
            const double xc = circularAbscissa(c.params, lam);
            const auto der = potential::yAll(c.params, xc);
            CHECK(std::fabs(xc * der.d1 - der.y - lam * lam) <= 1e-12 * lam * lam);
        }
    }
    // Bounded: Y' diverges at the vertex, so every Lambda has a circular orbit just inside it
    CHECK(circularAbscissa(potential::fromBounded(1, 1), 100.0) == Approx(2).epsilon(1e-7));
    CHECK(circularAbscissa(potential::fromBounded(1, 1), 100.0) < 2);
    // an unbound energy has no circular orbit
    CHECK(kindOf([] { circularAbscissaAtEnergy(potential::ParabolaCurve(kKepler), 0.1); }) == ErrorKind::NoCircularOrbit);
    CHECK(kindOf([] { circularAbscissa(kKepler, -1.0); }) == ErrorKind::InvalidParams);
}

TEST_CASE("invariants from the potential")
{
    const auto ke = invariantsFromPotential(kKepler, 1.0);
    CHECK(ke.route == Route::FromPotential);
    CHECK(ke.l == Approx(-0.5).epsilon(1e-14));
    CHECK(ke.b_inv == Approx(1).epsilon(1e-14));  // sqrt(8 * 1/8)
    // Kepler: Y3 / Y2 = -3 / (2 x), so B = 4 Y3 / Y2 = -3 at x_c = 2
    CHECK(ke.B_inv == Approx(-3).epsilon(1e-13));

    const auto ha = invariantsFromPotential(kHarmonic, 0.7);
    CHECK(ha.B_inv == 0);
    CHECK(ha.b_inv == Approx(2).epsilon(1e-14));

    for(const auto& c : ts::classCases()) {
        for(double lam : c.lambdas) {
            const auto inv = invariantsFromPotential(c.params, lam);
            const auto der = potential::yAll(c.params, circularAbscissa(c.params, lam));
            CHECK(inv.b_inv > 0);
            if(der.d3 != 0)
                CHECK(inv.B_inv == Approx(4 * der.d3 / der.d2).epsilon(1e-10));
        }
    }
}

TEST_CASE("invariants from the period")
{
    const auto ke = invariantsFromPeriod(kKepler, 1.0);
    CHECK(ke.route == Route::FromPeriod);
    CHECK(ke.l == Approx(-0.5).epsilon(1e-14));
    CHECK(ke.b_inv == Approx(1).epsilon(1e-14));
    CHECK(invariantsFromPeriod(kHarmonic, 1.3).B_inv == 0);

    // B = -4 pi^2 T' / T^3 with T' from finite differences of the period function
    for(const auto& c : ts::classCases()) {
        for(double lam : c.lambdas) {
            const auto inv = invariantsFromPeriod(c.params, lam);
            const ts::Fn T = [&](double xi) { return analytic::radialPeriod(c.params, xi); };
            const double h = 1e-4 * std::max(1.0, std::fabs(inv.l));
            const double Tc = T(inv.l);
            CHECK(inv.B_inv == Approx(-4 * pi * pi * ts::d1(T, inv.l, h) / (Tc * Tc * Tc)).epsilon(1e-8).scale(1));
        }
    }
}

TEST_CASE("route equality")
{
    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        for(double lam : c.lambdas) {
            const auto a = invariantsFromPotential(c.params, lam), b = invariantsFromPeriod(c.params, lam);
            CHECK(std::fabs(a.l - b.l) <= 1e-10);
            CHECK(std::fabs(a.b_inv - b.b_inv) <= 1e-10 * b.b_inv);
            CHECK(std::fabs(a.B_inv - b.B_inv) <= 1e-6 * std::max(1.0, std::fabs(b.B_inv)));
        }
    }
    const auto a = invariantsFromPotential(kHenon, 1.0), b = invariantsFromPeriod(kHenon, 1.0);
    CHECK(a.B_inv == Approx(b.B_inv).epsilon(1e-9));
}

TEST_CASE("isochrone theorem")
{
    const std::vector<double> lams{0.5, 1.0, 2.0};
    const auto he = isochroneTheoremCheck(kHenon, lams);
    REQUIRE(he.rows.size() == 3);
    CHECK(he.max_birkhoff_ode <= 1e-6);
    CHECK(he.max_parabola_ode <= 1e-10);
    for(const auto& row : he.rows) {
        CHECK(row.xc_identity <= 1e-8);
        CHECK(row.energy_slope <= 1e-8);
    }

    const auto ha = isochroneTheoremCheck(kHarmonic, lams);
    CHECK(ha.max_birkhoff_ode <= 1e-12);
    CHECK(ha.max_parabola_ode == 0);

    for(const auto& c : ts::classCases()) {
        const auto r = isochroneTheoremCheck(c.params, c.lambdas);
        CHECK(r.max_birkhoff_ode <= 1e-6);
        CHECK(r.max_parabola_ode <= 1e-10);
    }

    // a non-parabola violates both identities
    const auto power = potential::powerLawCurve(2.5, 1.0);
    const auto bad = isochroneTheoremCheck(*power, lams);
    CHECK(bad.max_parabola_ode > 1e-2);
    CHECK(bad.max_birkhoff_ode > 1e-3);
    const auto plummer = isochroneTheoremCheck(*potential::plummerCurve(1, 1), std::vector<double>{0.3, 0.5, 0.7});
    CHECK(plummer.max_parabola_ode > 1e-2);
}

TEST_CASE("Bertrand check")
{
    const auto ke = bertrandCheck(kKepler, std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5});
    CHECK(ke.q_fit == Approx(1).epsilon(1e-6));
    CHECK(ke.residual <= 1e-6);
    const auto ha = bertrandCheck(kHarmonic, std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5});
    CHECK(ha.q_fit == Approx(0.5).epsilon(1e-6));
    CHECK(ha.residual <= 1e-6);
    const auto he = bertrandCheck(kHenon, std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5});
    CHECK(he.residual > 1e-3);
    REQUIRE(he.q_local.size() == 5);
    // local Q equals Theta / 2 pi
    for(std::size_t i = 0; i < 5; ++i) {
        const double lam = 0.5 + 0.25 * static_cast<double>(i);
        CHECK(he.q_local[i] == Approx(analytic::apsidalAngle(kHenon, lam) / (2 * pi)).epsilon(1e-8));
    }
}

TEST_CASE("third law")
{
    CHECK(thirdLaw(kKepler, -0.5) == Approx(2 * pi).epsilon(1e-12));
    for(double xi : {0.5, 1.0, 4.0})
        CHECK(thirdLaw(kHarmonic, xi) == Approx(pi).epsilon(1e-12));
    CHECK(thirdLaw(kHenon, -0.25) == Approx(pi * std::sqrt(32.0)).epsilon(1e-10));
    for(const auto& c : ts::classCases()) {
        for(double lam : c.lambdas) {
            const double xi = analytic::circularEnergy(c.params, lam);
            CHECK(thirdLaw(c.params, xi) == Approx(analytic::radialPeriod(c.params, xi)).epsilon(1e-10));
        }
    }
    CHECK(kindOf([] { thirdLaw(kKepler, 1.0); }) == ErrorKind::NoCircularOrbit);
}

TEST_CASE("frequency invariants")
{
    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        for(const auto& oc : ts::orbitGrid(c)) {
            const double J = analytic::radialAction(c.params, oc);
            const auto inv = frequencyInvariants(c.params, J, oc.lam);
            CHECK(std::fabs(inv.J_inv) <= 1e-6);
            if(c.name == "Kepler" || c.name == "Harmonic") {
                CHECK(std::fabs(inv.T_inv) <= 1e-6);
                CHECK(std::fabs(inv.G_inv) <= 1e-6);
            }
        }
        // the circular edge uses the one-sided stencil
        CHECK(std::fabs(frequencyInvariants(c.params, 0.0, c.lambdas[2]).J_inv) <= 1e-6);
    }
    const auto he = frequencyInvariants(kHenon, 0.1, 1.0);
    CHECK(std::fabs(he.T_inv) > 1e-4);
    // the torsion is resolved by the finite differences: refining the data does not move it
    const ts::Fn wJ = [](double l) { return analytic::frequencies(kHenon, 0.1, l).omega_J; };
    const ts::Fn wL = [](double l) { return analytic::frequencies(kHenon, 0.1, l).omega_Lambda; };
    const ts::Fn wJj = [](double j) { return analytic::frequencies(kHenon, j, 1.0).omega_J; };
    const ts::Fn wLj = [](double j) { return analytic::frequencies(kHenon, j, 1.0).omega_Lambda; };
    const double torsion = ts::d1(wJj, 0.1, 5e-6) * ts::d1(wL, 1.0, 5e-6) - ts::d1(wLj, 0.1, 5e-6) * ts::d1(wJ, 1.0, 5e-6);
    CHECK(he.T_inv == Approx(torsion).epsilon(1e-6));
    CHECK(kindOf([] { frequencyInvariants(kHenon, -0.1, 1.0); }) == ErrorKind::InvalidParams);
}
