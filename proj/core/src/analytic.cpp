#include "isochrone/analytic.hpp"
#include "isochrone/error.hpp"
#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <sstream>

namespace isochrone::analytic {

namespace {

using std::numbers::pi;
constexpr double kTwoPi = 2 * pi;

inline double pow2(double x) { return x * x; }

std::string num(double x)
{
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

[[noreturn]] void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

/// a + b xi, negative for every bound orbit of a non-harmonic potential
double energySlope(const ParabolaParams& p, double xi)
{
    const double s = p.a + p.b * xi;
    if(!(s < 0))
        fail(ErrorKind::UnboundOrbit, "a + b xi = " + num(s) + " must be negative for a bound orbit");
    return s;
}

void requireAngularMomentum(double lam)
{
    if(!(lam > 0) || !std::isfinite(lam))
        fail(ErrorKind::InvalidParams, "angular momentum Lambda must be positive (got " + num(lam) + ")");
}

/// Lambda^2 - e/d for the harmonic class
double harmonicLambdaTerm(const ParabolaParams& p, double lam)
{
    const double v = lam * lam - p.e / p.d;
    if(!(v > 0))
        fail(ErrorKind::InvalidParams, "Lambda^2 - e/d must be positive (got " + num(v) + ")");
    return v;
}

/// sqrt(b^2 L^4 - d L^2 + e)
double lambdaRoot(const ParabolaParams& p, double lam)
{
    const double l2 = lam * lam;
    const double q = pow2(p.b * l2) - p.d * l2 + p.e;
    if(!(q > 0))
        fail(ErrorKind::InvalidParams, "b^2 L^4 - d L^2 + e must be positive (got " + num(q) + ")");
    return std::sqrt(q);
}

struct Shape {
    int sigma = 0;
    double slope = 0;   // a + b xi
    double ecc = 0;
    double alpha2 = 0;  // |alpha^2|
    double xv = 0;
    TurningPoints tp;
};

/// Turning points and ellipse-like shape of a bound orbit; throws for inadmissible (xi, Lambda).
Shape orbitShape(const ParabolaParams& p, const OrbitConstants& oc)
{
    potential::validate(p);
    if(!(oc.lam >= 0) || !std::isfinite(oc.lam) || !std::isfinite(oc.xi))
        fail(ErrorKind::InvalidParams, "orbit constants must be finite with Lambda >= 0");
    Shape sh;
    if(p.b == 0) {
        // a^2 x^2 / d + (xi + c/d) x + e/d - L^2 = 0, rewritten as x^2 - S x + P = 0
        const double a2 = p.a * p.a;
        const double S = -(p.d * oc.xi + p.c) / a2;
        const double P = (p.e - oc.lam * oc.lam * p.d) / a2;
        double D = S * S - 4 * P;
        if(D < 0 && D >= -1e-12 * S * S)
            D = 0;
        if(!(S > 0) || !(P >= 0) || !(D >= 0))
            fail(ErrorKind::NoBoundOrbit, "no bound orbit at xi = " + num(oc.xi) +
                ", Lambda = " + num(oc.lam));
        sh.tp.x_a = (S + std::sqrt(D)) / 2;
        sh.tp.x_p = P / sh.tp.x_a;
        sh.ecc = std::sqrt(std::max(0.0, 1 - sh.tp.x_p / sh.tp.x_a));
        return sh;
    }
    sh.sigma = p.b > 0 ? 1 : -1;
    sh.slope = energySlope(p, oc.xi);
    double e2 = eccentricitySquared(p, oc);
    if(e2 < 0 && e2 >= -1e-12)
        e2 = 0;
    if(!(e2 >= 0) || !(e2 < 1))
        fail(ErrorKind::NoBoundOrbit, "eps^2 = " + num(e2) + " outside [0, 1) at xi = " +
            num(oc.xi) + ", Lambda = " + num(oc.lam));
    sh.ecc = std::sqrt(e2);
    sh.alpha2 = p.discriminant() / (8 * std::fabs(p.b) * pow2(sh.slope));
    sh.xv = potential::vertexAbscissa(p);
    const double s = sh.sigma;
    sh.tp.x_p = sh.xv + s * 2 * sh.alpha2 * pow2(1 - s * sh.ecc);
    sh.tp.x_a = sh.xv + s * 2 * sh.alpha2 * pow2(1 + s * sh.ecc);
    const potential::Interval dom = potential::domain(p);
    if(!(sh.tp.x_p >= dom.lo) || !(sh.tp.x_a <= dom.hi))
        fail(ErrorKind::NoBoundOrbit, "turning points [" + num(sh.tp.x_p) + ", " + num(sh.tp.x_a) +
            "] leave the physical domain");
    return sh;
}

}  // namespace

double OrbitElements::rPeri() const { return std::sqrt(x_p / 2); }
double OrbitElements::rApo() const { return std::sqrt(x_a / 2); }
bool OrbitElements::isCircular() const { return ecc <= kCircularEccentricity; }

double eccentricitySquared(const ParabolaParams& p, const OrbitConstants& oc)
{
    potential::validate(p);
    if(p.b == 0) {
        const Shape sh = orbitShape(p, oc);
        return pow2(sh.ecc);
    }
    const double s = energySlope(p, oc.xi);
    const double delta = p.discriminant();
    const double l2 = oc.lam * oc.lam;
    return 1 + 2 * (2 * pow2(p.b) * l2 - p.d) * s / delta +
        (pow2(p.d) - 4 * pow2(p.b) * p.e) * pow2(s / delta);
}

TurningPoints turningPoints(const ParabolaParams& p, const OrbitConstants& oc)
{
    return orbitShape(p, oc).tp;
}

double radialPeriod(const ParabolaParams& p, double xi)
{
    potential::validate(p);
    if(p.b == 0)
        return (pi / 2) * std::sqrt(-p.d) / std::fabs(p.a);
    const double s = -energySlope(p, xi);
    return (pi / 2) * std::sqrt(p.discriminant()) / (s * std::sqrt(s));
}

double apsidalAngle(const ParabolaParams& p, double lam)
{
    potential::validate(p);
    requireAngularMomentum(lam);
    if(p.b == 0)
        return pi * lam / std::sqrt(harmonicLambdaTerm(p, lam));
    const double S = lambdaRoot(p, lam);
    const double inner = (2 * pow2(p.b * lam) - p.d) / (S * S) + 2 * p.b / S;
    if(!(inner > 0))
        fail(ErrorKind::InvalidParams, "apsidal angle undefined at Lambda = " + num(lam));
    return pi * lam * std::sqrt(inner);
}

double actionOffset(const ParabolaParams& p, double lam)
{
    potential::validate(p);
    if(p.b == 0)
        fail(ErrorKind::InvalidParams, "R(Lambda) is defined for b != 0 only");
    const double S = lambdaRoot(p, lam);
    const double r2 = 2 * pow2(p.b * lam) - p.d + 2 * p.b * S;
    if(!(r2 >= 0))
        fail(ErrorKind::InvalidParams, "R(Lambda)^2 = " + num(r2) + " is negative");
    return std::sqrt(r2);
}

double radialAction(const ParabolaParams& p, const OrbitConstants& oc)
{
    const Shape sh = orbitShape(p, oc);
    requireAngularMomentum(oc.lam);
    double J;
    if(p.b == 0) {
        const double sd = std::sqrt(-p.d), A = std::fabs(p.a);
        J = sd / (4 * A) * (oc.xi + p.c / p.d) - 0.5 * std::sqrt(harmonicLambdaTerm(p, oc.lam));
    } else {
        J = (std::sqrt(-p.discriminant() / sh.slope) - actionOffset(p, oc.lam)) / (2 * p.b);
    }
    return std::max(J, 0.0);
}

double hamiltonian(const ParabolaParams& p, double J, double lam)
{
    potential::validate(p);
    requireAngularMomentum(lam);
    if(!(J >= 0) || !std::isfinite(J))
        fail(ErrorKind::InvalidParams, "radial action must be non-negative (got " + num(J) + ")");
    if(p.b == 0) {
        const double k = std::fabs(p.a) / std::sqrt(-p.d);
        return -p.c / p.d + 4 * k * J + 2 * k * std::sqrt(harmonicLambdaTerm(p, lam));
    }
    const double D = 2 * p.b * J + actionOffset(p, lam);
    if(!(D > 0))
        fail(ErrorKind::NoBoundOrbit, "2 b J + R = " + num(D) + " must be positive");
    return -p.a / p.b - p.discriminant() / (p.b * D * D);
}

double circularEnergy(const ParabolaParams& p, double lam)
{
    return hamiltonian(p, 0, lam);
}

Frequencies frequencies(const ParabolaParams& p, double J, double lam)
{
    potential::validate(p);
    requireAngularMomentum(lam);
    if(!(J >= 0) || !std::isfinite(J))
        fail(ErrorKind::InvalidParams, "radial action must be non-negative (got " + num(J) + ")");
    if(p.b == 0) {
        const double k = std::fabs(p.a) / std::sqrt(-p.d);
        return {4 * k, 2 * k * lam / std::sqrt(harmonicLambdaTerm(p, lam))};
    }
    const double R = actionOffset(p, lam);
    const double D = 2 * p.b * J + R;
    if(!(D > 0))
        fail(ErrorKind::NoBoundOrbit, "2 b J + R = " + num(D) + " must be positive");
    const double delta = p.discriminant();
    const double D3 = D * D * D;
    return {4 * delta / D3, 2 * delta * lam * R / (lambdaRoot(p, lam) * D3)};
}

OrbitElements orbitElements(const ParabolaParams& p, const OrbitConstants& oc)
{
    const Shape sh = orbitShape(p, oc);
    requireAngularMomentum(oc.lam);
    OrbitElements el;
    el.sign_b = sh.sigma;
    el.ecc = sh.ecc;
    el.x_p = sh.tp.x_p;
    el.x_a = sh.tp.x_a;
    el.T = radialPeriod(p, oc.xi);
    el.Theta = apsidalAngle(p, oc.lam);
    el.J = radialAction(p, oc);
    if(p.b == 0) {
        el.omega_r = 4 * std::fabs(p.a) / std::sqrt(-p.d);
        el.alpha2 = el.x_a / 2;
        el.x_v = std::numeric_limits<double>::quiet_NaN();
        el.zeta2 = std::numeric_limits<double>::quiet_NaN();
        return el;
    }
    const double ms = -sh.slope;
    el.omega_r = 4 * ms * std::sqrt(ms) / std::sqrt(p.discriminant());
    el.alpha2 = sh.sigma * sh.alpha2;
    el.x_v = sh.xv;
    el.zeta2 = -sh.sigma * sh.xv / (2 * sh.alpha2);
    return el;
}

double solveKepler(double ecc, double meanAnomaly)
{
    if(!(ecc >= 0 && ecc < 1))
        fail(ErrorKind::InvalidParams, "Kepler equation needs eccentricity in [0, 1) (got " + num(ecc) + ")");
    if(!std::isfinite(meanAnomaly))
        fail(ErrorKind::InvalidParams, "mean anomaly must be finite");
    const double k = std::floor(meanAnomaly / kTwoPi);
    const double m = meanAnomaly - k * kTwoPi;
    if(ecc == 0)
        return meanAnomaly;

    // f(E) = E - ecc sin E - m is increasing with f(0) <= 0 < f(2 pi)
    double lo = 0, hi = kTwoPi;
    double E = m + ecc * std::sin(m);
    for(int iter = 0; iter < 200; ++iter) {
        const double f = E - ecc * std::sin(E) - m;
        if(f == 0)
            break;
        (f < 0 ? lo : hi) = E;
        double next = E - f / (1 - ecc * std::cos(E));
        if(!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if(std::fabs(next - E) <= 4e-16 * std::max(1.0, std::fabs(E))) {
            E = next;
            break;
        }
        E = next;
    }
    const double residual = std::fabs(E - ecc * std::sin(E) - m);
    if(!(residual <= 1e-13))
        fail(ErrorKind::ToleranceNotMet, "Kepler solve residual " + num(residual));
    return E + k * kTwoPi;
}

double eccentricAnomaly(const OrbitElements& el, double meanAnomaly)
{
    if(el.sign_b == 0 || el.isCircular())
        return meanAnomaly;
    if(el.sign_b > 0)
        return solveKepler(el.ecc, meanAnomaly);
    // E + ecc sin E = M  <=>  (E - pi) - ecc sin(E - pi) = M - pi
    return pi + solveKepler(el.ecc, meanAnomaly - pi);
}

RadiusSample radiusOfE(const ParabolaParams& p, const OrbitElements& el, double E)
{
    double x;
    if(el.isCircular())
        x = el.x_p;
    else if(p.b == 0)
        x = el.x_p + (el.x_a - el.x_p) * pow2(std::sin(E / 2));
    else
        x = el.x_v + 2 * el.alpha2 * pow2(1 - el.sign_b * el.ecc * std::cos(E));
    x = std::clamp(x, el.x_p, el.x_a);
    return {x, std::sqrt(x / 2)};
}

namespace {

/// theta on the outbound half orbit, E in [0, pi]
AngleEvaluation halfOrbitAngle(const ParabolaParams& p, double lam, const OrbitElements& el, double E)
{
    const bool apo = E >= pi;
    const double t = apo ? 0 : std::tan(E / 2);
    if(p.b == 0) {
        const double k = std::sqrt(el.x_a / el.x_p);
        const double at = apo ? pi / 2 : std::atan(k * t);
        return {4 * lam / (el.omega_r * std::sqrt(el.x_p * el.x_a)) * at, 0, false};
    }
    const double sigma = el.sign_b;
    const double ecc = el.ecc;
    const double coef = sigma * lam / (el.omega_r * std::fabs(el.alpha2));

    // one of the two partial fractions, z = +zeta or -zeta
    auto term = [&](auto z) {
        const auto ez = ecc / (1.0 + z);
        const auto k = std::sqrt((1.0 + sigma * ez) / (1.0 - sigma * ez));
        const auto pre = 1.0 / ((1.0 + z) * std::sqrt(1.0 - ez * ez));
        if(apo)
            return pre * (pi / 2);
        return pre * std::atan(k * t);
    };

    if(el.x_v > 0) {
        // Bounded and Hollowed: evaluated on the complex path, conjugate terms summed
        const std::complex<double> zeta = std::sqrt(std::complex<double>(el.zeta2, 0));
        const std::complex<double> sum = term(zeta) + term(-zeta);
        return {coef * sum.real(), std::fabs(coef * sum.imag()), true};
    }
    const double zeta = std::sqrt(std::max(el.zeta2, 0.0));
    return {coef * (term(zeta) + term(-zeta)), 0, false};
}

}  // namespace

AngleEvaluation angleOfEDetailed(const ParabolaParams& p, const OrbitConstants& oc,
    const OrbitElements& el, double E)
{
    requireAngularMomentum(oc.lam);
    if(!std::isfinite(E))
        fail(ErrorKind::InvalidParams, "eccentric anomaly must be finite");
    if(el.isCircular())
        return {el.Theta * E / kTwoPi, 0, false};
    const double k = std::floor(E / kTwoPi);
    const double e = E - k * kTwoPi;
    AngleEvaluation half;
    if(e <= pi) {
        half = halfOrbitAngle(p, oc.lam, el, e);
    } else {
        // inbound half is the mirror image of the outbound one
        half = halfOrbitAngle(p, oc.lam, el, kTwoPi - e);
        half.theta = el.Theta - half.theta;
    }
    half.theta += k * el.Theta;
    return half;
}

double angleOfE(const ParabolaParams& p, const OrbitConstants& oc, const OrbitElements& el, double E)
{
    return angleOfEDetailed(p, oc, el, E).theta;
}

std::vector<TrajectorySample> trajectory(const ParabolaParams& p, const OrbitConstants& oc,
    std::span<const double> times)
{
    const OrbitElements el = orbitElements(p, oc);
    std::vector<TrajectorySample> out;
    out.reserve(times.size());
    for(double t : times) {
        if(!std::isfinite(t))
            fail(ErrorKind::InvalidParams, "sample times must be finite");
        TrajectorySample s;
        s.t = t;
        s.zJ = el.omega_r * t;
        s.zLambda = el.Theta / kTwoPi * s.zJ;
        s.E = eccentricAnomaly(el, s.zJ);
        s.cycle = static_cast<long>(std::floor(s.E / kTwoPi));
        const RadiusSample rs = radiusOfE(p, el, s.E);
        s.x = rs.x;
        s.r = rs.r;
        s.theta = angleOfE(p, oc, el, s.E);
        out.push_back(s);
    }
    return out;
}

}  // namespace isochrone::analytic
