#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isochrone/analytic.hpp"
#include "isochrone/error.hpp"
#include "support/cases.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace isochrone;
using namespace isochrone::analytic;
using std::numbers::pi;
namespace ts = testing_support;
using doctest::Approx;

namespace {

const ParabolaParams kKepler = potential::fromKepler(1);
const ParabolaParams kHarmonic = potential::fromHarmonic(2);
const ParabolaParams kHenon = potential::fromHenon(1, 1);

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

double rel(double a, double b)
{
    return std::fabs(a - b) / std::fabs(b);
}

/// J = (1/pi) int sqrt(2 (xi - psi) r^2 - Lambda^2) / r dr, by bisection and Simpson.
double bruteForceAction(const ParabolaParams& p, const OrbitConstants& oc, double r_in)
{
    const ts::Fn w = [&](double r) { return 2 * (oc.xi - potential::psiValue(p, r)) * r * r - oc.lam * oc.lam; };
    const auto dom = potential::domain(p);
    const double rlo = std::sqrt(dom.lo / 2) * (1 + 1e-12) + 1e-300;
    const double rhi = dom.isBounded() ? std::sqrt(dom.hi / 2) * (1 - 1e-14) : 1e3;
    const double r_p = ts::bisect(w, rlo, r_in), r_a = ts::bisect(w, r_in, rhi);
    const double width = r_a - r_p;
    const ts::Fn f = [&](double u) {
        const double s = std::sin(u), c = std::cos(u), r = r_p + width * s * s;
        return 2 * width * s * c * std::sqrt(std::max(w(r), 0.0)) / r;
    };
    return ts::simpson(f, 0, pi / 2, 200000) / pi;
}

}  // namespace

TEST_CASE("turning points")
{
    const auto circ = turningPoints(kKepler, {-0.5, 1.0});
    CHECK(circ.x_p == Approx(2).epsilon(1e-7));
    CHECK(circ.x_a == Approx(2).epsilon(1e-7));

    const auto tp = turningPoints(kKepler, {-0.5, 0.8});
    CHECK(tp.x_p == Approx(0.32).epsilon(1e-12));
    CHECK(tp.x_a == Approx(5.12).epsilon(1e-12));

    const auto ha = turningPoints(kHarmonic, {1.0, 1.0});
    CHECK(ha.x_p == Approx(2).epsilon(1e-7));
    CHECK(ha.x_a == Approx(2).epsilon(1e-7));

    for(const auto& c : ts::classCases()) {
        for(const auto& oc : ts::orbitGrid(c)) {
            const auto t = turningPoints(c.params, oc);
            CHECK(t.x_p <= t.x_a);
            for(double x : {t.x_p, t.x_a}) {
                const double res = oc.xi * x - oc.lam * oc.lam - potential::yValue(c.params, x);
                CHECK(std::fabs(res) <= 1e-10 * std::max(1.0, std::fabs(oc.xi * x)));
            }
        }
    }
    CHECK(kindOf([] { turningPoints(kHenon, {-0.25, 1.0}); }) == ErrorKind::NoBoundOrbit);
}

TEST_CASE("radial period")
{
    CHECK(radialPeriod(kKepler, -0.5) == Approx(2 * pi).epsilon(1e-14));
    for(double xi : {-1.0, 0.5, 3.0})
        CHECK(radialPeriod(kHarmonic, xi) == Approx(pi).epsilon(1e-14));
    CHECK(radialPeriod(kHenon, -0.25) == Approx(pi * std::sqrt(32.0)).epsilon(1e-14));
    // Kepler: 2 pi mu / (-2 xi)^(3/2)
    CHECK(radialPeriod(kKepler, -0.3) == Approx(2 * pi / std::pow(0.6, 1.5)).epsilon(1e-14));
    CHECK(kindOf([] { radialPeriod(kKepler, 0.0); }) == ErrorKind::UnboundOrbit);
}

TEST_CASE("apsidal angle")
{
    for(double lam : {0.3, 1.0, 4.0}) {
        CHECK(apsidalAngle(kKepler, lam) == Approx(2 * pi).epsilon(1e-14));
        CHECK(apsidalAngle(kHarmonic, lam) == Approx(pi).epsilon(1e-14));
    }
    CHECK(apsidalAngle(kHenon, 2.0) == Approx(pi * (1 + 2 / std::sqrt(8.0))).epsilon(1e-14));
    CHECK(kindOf([] { apsidalAngle(kHenon, -1.0); }) == ErrorKind::InvalidParams);
}

TEST_CASE("radial action")
{
    CHECK(radialAction(kKepler, {-0.5, 0.8}) == Approx(0.2).epsilon(1e-13));
    CHECK(std::fabs(radialAction(kKepler, {-0.5, 1.0})) <= 1e-12);
    for(const auto& c : ts::classCases()) {
        const double lam = c.lambdas[2];
        CHECK(std::fabs(radialAction(c.params, {circularEnergy(c.params, lam), lam})) <= 1e-10);
    }
    // Hénon, R(1) = sqrt(6 + 2 sqrt 5)
    CHECK(actionOffset(kHenon, 1.0) == Approx(std::sqrt(6 + 2 * std::sqrt(5.0))).epsilon(1e-14));
    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        const auto e = orbitElements(c.params, c.orbit);
        const double r_c = std::sqrt((e.x_p + e.x_a) / 4);  // any radius strictly between the turning points
        CHECK(radialAction(c.params, c.orbit) == Approx(bruteForceAction(c.params, c.orbit, r_c)).epsilon(1e-7));
    }
}

TEST_CASE("Hamiltonian")
{
    CHECK(hamiltonian(kKepler, 0.2, 0.8) == Approx(-0.5).epsilon(1e-14));
    CHECK(hamiltonian(kKepler, radialAction(kKepler, {-0.5, 0.8}), 0.8) == Approx(-0.5).epsilon(1e-12));
    // harmonic omega = 2: H = 2 J + Lambda
    for(double J : {0.0, 0.3, 1.2})
        for(double lam : {0.4, 1.0})
            CHECK(hamiltonian(kHarmonic, J, lam) == Approx(2 * J + lam).epsilon(1e-14));
    const ts::Fn H = [](double J) { return hamiltonian(kHarmonic, J, 1.0); };
    CHECK(ts::d1(H, 0.5, 1e-3) == Approx(2).epsilon(1e-10));

    for(const auto& c : ts::classCases()) {
        for(const auto& oc : ts::orbitGrid(c)) {
            const double J = radialAction(c.params, oc);
            CHECK(hamiltonian(c.params, J, oc.lam) == Approx(oc.xi).epsilon(1e-10).scale(1));
        }
    }
}

TEST_CASE("frequencies")
{
    const auto ke = frequencies(kKepler, 0.2, 0.8);
    CHECK(ke.omega_J == Approx(1).epsilon(1e-13));
    CHECK(ke.omega_Lambda / ke.omega_J == Approx(1).epsilon(1e-13));
    const auto ha = frequencies(kHarmonic, 0.3, 1.0);
    CHECK(ha.omega_J == Approx(2).epsilon(1e-14));
    CHECK(ha.omega_Lambda / ha.omega_J == Approx(0.5).epsilon(1e-14));
    const auto he = frequencies(kHenon, 0.05, 2.0);
    CHECK(he.omega_Lambda / he.omega_J == Approx((1 + 2 / std::sqrt(8.0)) / 2).epsilon(1e-12));

    // omega = grad H, checked by finite differences
    for(const auto& c : ts::classCases()) {
        for(const auto& oc : ts::orbitGrid(c)) {
            const double J = radialAction(c.params, oc);
            const auto w = frequencies(c.params, J, oc.lam);
            const double h = 1e-4 * oc.lam;
            const ts::Fn HL = [&](double l) { return hamiltonian(c.params, J, l); };
            CHECK(ts::d1(HL, oc.lam, h) == Approx(w.omega_Lambda).epsilon(1e-8));
            CHECK(w.omega_J == Approx(2 * pi / radialPeriod(c.params, oc.xi)).epsilon(1e-12));
        }
    }
}

TEST_CASE("orbit elements")
{
    const auto el = orbitElements(kKepler, {-0.5, 0.8});
    CHECK(el.omega_r == Approx(1).epsilon(1e-14));
    CHECK(el.ecc == Approx(0.6).epsilon(1e-14));
    CHECK(std::sqrt(el.alpha2) == Approx(1).epsilon(1e-14));
    CHECK(el.T == Approx(2 * pi).epsilon(1e-14));
    CHECK(el.Theta == Approx(2 * pi).epsilon(1e-14));
    CHECK(el.J == Approx(0.2).epsilon(1e-13));
    CHECK(el.rPeri() == Approx(0.4).epsilon(1e-13));
    CHECK(el.rApo() == Approx(1.6).epsilon(1e-13));

    const auto circ = orbitElements(kKepler, {-0.5, 1.0});
    CHECK(circ.ecc == 0);
    CHECK(circ.isCircular());
    CHECK(circ.x_p == circ.x_a);

    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        for(const auto& oc : ts::orbitGrid(c)) {
            const auto e = orbitElements(c.params, oc);
            CHECK(e.omega_r * e.T == Approx(2 * pi).epsilon(1e-12));
            CHECK(e.ecc >= 0);
            CHECK(e.ecc < 1);
            CHECK(e.x_p <= e.x_a);
            if(c.params.b != 0) {
                const double target = std::sqrt(c.params.discriminant() / (2 * std::pow(std::fabs(c.params.b), 3)));
                CHECK(rel(e.omega_r * e.omega_r * std::pow(std::fabs(e.alpha2), 1.5), target) <= 1e-12);
            }
        }
    }
    CHECK(kindOf([] { orbitElements(kHenon, {0.5, 0.5}); }) == ErrorKind::UnboundOrbit);
}

TEST_CASE("Kepler equation")
{
    CHECK(solveKepler(0.6, 0) == 0);
    CHECK(solveKepler(0.6, pi) == Approx(pi).epsilon(1e-15));
    const double E = solveKepler(0.6, 1.0);
    CHECK(E == Approx(ts::bisectKepler(0.6, 1.0)).epsilon(1e-14));
    CHECK(std::fabs(E - 0.6 * std::sin(E) - 1.0) <= 1e-13);

    auto gen = ts::rng();
    std::uniform_real_distribution<double> eccs(0, 0.99), means(-20, 20);
    for(int i = 0; i < 1000; ++i) {
        const double ecc = eccs(gen), M = means(gen);
        const double e = solveKepler(ecc, M);
        CHECK(std::fabs(e - ecc * std::sin(e) - M) <= 1e-13);
        CHECK(e == Approx(ts::bisectKepler(ecc, M)).epsilon(1e-12).scale(1));
    }
    for(double ecc : {0.0, 0.5, 0.9, 0.99}) {
        double prev = -1;
        for(int k = 0; k <= 2000; ++k) {
            const double e = solveKepler(ecc, 4 * pi * k / 2000.0);
            CHECK(e > prev);
            prev = e;
        }
    }
}

TEST_CASE("radius of E")
{
    const auto el = orbitElements(kKepler, {-0.5, 0.8});
    CHECK(radiusOfE(kKepler, el, 0).r == Approx(0.4).epsilon(1e-13));
    CHECK(radiusOfE(kKepler, el, pi / 2).r == Approx(1).epsilon(1e-13));
    CHECK(radiusOfE(kKepler, el, pi).r == Approx(1.6).epsilon(1e-13));

    const auto ha = orbitElements(kHarmonic, {2.5, 1.0});
    CHECK(radiusOfE(kHarmonic, ha, pi / 2).x == Approx(0.5 * (ha.x_p + ha.x_a)).epsilon(1e-13));

    for(const auto& c : ts::classCases()) {
        const auto e = orbitElements(c.params, c.orbit);
        CHECK(radiusOfE(c.params, e, 0).x == Approx(e.x_p).epsilon(1e-12));
        CHECK(radiusOfE(c.params, e, pi).x == Approx(e.x_a).epsilon(1e-12));
        for(int k = 0; k <= 32; ++k) {
            const auto s = radiusOfE(c.params, e, 2 * pi * k / 32);
            CHECK(s.x >= e.x_p * (1 - 1e-12));
            CHECK(s.x <= e.x_a * (1 + 1e-12));
            CHECK(s.x == Approx(2 * s.r * s.r).epsilon(1e-14));
        }
    }
}

TEST_CASE("angle of E")
{
    const OrbitConstants oc{-0.5, 0.8};
    const auto el = orbitElements(kKepler, oc);
    CHECK(angleOfE(kKepler, oc, el, 0) == 0);
    CHECK(angleOfE(kKepler, oc, el, pi / 2) == Approx(2 * std::atan(2.0)).epsilon(1e-13));

    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        for(const auto& o : ts::orbitGrid(c)) {
            const auto e = orbitElements(c.params, o);
            CHECK(rel(angleOfE(c.params, o, e, pi), e.Theta / 2) <= 1e-10);
            for(double E : {0.3, 1.1, 2.5}) {
                const double th = angleOfE(c.params, o, e, E);
                CHECK(angleOfE(c.params, o, e, 2 * pi - E) == Approx(e.Theta - th).epsilon(1e-12));
                CHECK(angleOfE(c.params, o, e, E + 4 * pi) == Approx(2 * e.Theta + th).epsilon(1e-12));
                const auto det = angleOfEDetailed(c.params, o, e, E);
                CHECK(det.complex_branch == (c.params.b != 0 && e.x_v > 0));
                if(det.complex_branch)
                    CHECK(det.imag_residual <= 1e-12 * std::fabs(det.theta));
            }
        }
    }
}

TEST_CASE("angle of E matches the orbit equation")
{
    // d theta / dE = (d theta / dt) / (dE / dt) = (Lambda / r^2) / (Omega / (1 - s ecc cos E))
    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        const auto e = orbitElements(c.params, c.orbit);
        const ts::Fn th = [&](double E) { return angleOfE(c.params, c.orbit, e, E); };
        for(double E : {0.4, 1.3, 2.2, 2.9}) {
            const double r = radiusOfE(c.params, e, E).r;
            const double M = c.params.b == 0 ? 1.0 : 1 - e.sign_b * e.ecc * std::cos(E);
            CHECK(ts::d1(th, E, 1e-3) == Approx(c.orbit.lam / (r * r) * M / e.omega_r).epsilon(1e-8));
        }
    }
}

TEST_CASE("trajectory")
{
    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        const auto e = orbitElements(c.params, c.orbit);
        const std::vector<double> times{0, e.T / 2, e.T, 2.5 * e.T};
        const auto s = trajectory(c.params, c.orbit, times);
        REQUIRE(s.size() == 4);
        CHECK(s[0].r == Approx(e.rPeri()).epsilon(1e-12));
        CHECK(s[0].theta == 0);
        CHECK(s[1].r == Approx(e.rApo()).epsilon(1e-12));
        CHECK(s[1].theta == Approx(e.Theta / 2).epsilon(1e-10));
        CHECK(s[2].r == Approx(e.rPeri()).epsilon(1e-10));
        CHECK(s[2].theta == Approx(e.Theta).epsilon(1e-10));
        CHECK(s[3].cycle == 2);
        CHECK(s[3].theta == Approx(2.5 * e.Theta).epsilon(1e-10));
        CHECK(s[3].zJ == Approx(2.5 * 2 * pi).epsilon(1e-12));
        CHECK(s[3].zLambda == Approx(2.5 * e.Theta).epsilon(1e-12));
    }
    // circular: constant radius
    const auto circ = trajectory(kKepler, {-0.5, 1.0}, std::vector<double>{0, 1, 2, 3});
    for(const auto& s : circ)
        CHECK(s.r == Approx(1).epsilon(1e-7));
}

TEST_CASE("brute-force quadrature agrees with T and Theta")
{
    for(const auto& c : ts::classCases()) {
        CAPTURE(c.name);
        const auto e = orbitElements(c.params, c.orbit);
        const ts::Fn psi = [&](double r) { return potential::psiValue(c.params, r); };
        const double r_c = std::sqrt((e.x_p + e.x_a) / 4);
        const auto dom = potential::domain(c.params);
        const double rlo = std::sqrt(dom.lo / 2) * (1 + 1e-12) + 1e-300;
        const double rhi = dom.isBounded() ? std::sqrt(dom.hi / 2) * (1 - 1e-14) : 1e3;
        const auto bf = ts::bruteForceOrbit(psi, c.orbit.xi, c.orbit.lam, r_c, rlo, rhi);
        CHECK(bf.r_p == Approx(e.rPeri()).epsilon(1e-9));
        CHECK(bf.r_a == Approx(e.rApo()).epsilon(1e-9));
        CHECK(bf.T == Approx(e.T).epsilon(1e-6));
        CHECK(bf.Theta == Approx(e.Theta).epsilon(1e-6));
    }
}
