#include "isochrone/potential.hpp"
#include "isochrone/error.hpp"
#include <cmath>
#include <sstream>

namespace isochrone {

std::string_view toString(ErrorKind kind)
{
    switch(kind) {
        case ErrorKind::InvalidParams:     return "InvalidParams";
        case ErrorKind::OutOfDomain:       return "OutOfDomain";
        case ErrorKind::SingularPoint:     return "SingularPoint";
        case ErrorKind::NoBoundOrbit:      return "NoBoundOrbit";
        case ErrorKind::UnboundOrbit:      return "UnboundOrbit";
        case ErrorKind::NoCircularOrbit:   return "NoCircularOrbit";
        case ErrorKind::ToleranceNotMet:   return "ToleranceNotMet";
        case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorKind::DomainExit:        return "DomainExit";
    }
    return "Unknown";
}

namespace potential {

namespace {

inline double pow2(double x) { return x * x; }

std::string formatNumber(double x)
{
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

[[noreturn]] void invalid(const std::string& what)
{
    throw Error(ErrorKind::InvalidParams, what);
}

/// b delta (x - x_v), written without the division hidden in x_v
double radicand(const ParabolaParams& p, double x)
{
    return p.b * p.discriminant() * x + (pow2(p.d) - 4 * pow2(p.b) * p.e) / 4;
}

void requireInDomain(const ParabolaParams& p, double x)
{
    const Interval dom = domain(p);
    if(!(x >= dom.lo && x <= dom.hi))
        throw Error(ErrorKind::OutOfDomain, "x = " + formatNumber(x) + " lies outside [" +
            formatNumber(dom.lo) + ", " + formatNumber(dom.hi) + "]");
}

}  // namespace

std::string_view toString(PotentialKind kind)
{
    switch(kind) {
        case PotentialKind::Harmonic: return "Harmonic";
        case PotentialKind::Henon:    return "Henon";
        case PotentialKind::Bounded:  return "Bounded";
        case PotentialKind::Hollowed: return "Hollowed";
    }
    return "Unknown";
}

void validate(const ParabolaParams& p)
{
    for(double v : {p.a, p.b, p.c, p.d, p.e})
        if(!std::isfinite(v))
            invalid("Latin coefficients must be finite");
    const double delta = p.discriminant();
    if(!(delta > 0))
        invalid("discriminant delta = ad - bc must be > 0 (got " + formatNumber(delta) + ")");
    if(p.b == 0) {
        if(!(p.d < 0))
            invalid("harmonic parabola (b = 0) requires d < 0 for a convex branch (got d = " +
                formatNumber(p.d) + ")");
        return;
    }
    if(p.b < 0 && !(vertexAbscissa(p) > 0))
        invalid("left-opening parabola (b < 0) requires x_v > 0 for a non-empty physical branch "
            "(got x_v = " + formatNumber(vertexAbscissa(p)) + ")");
}

double vertexAbscissa(const ParabolaParams& p)
{
    if(p.b == 0)
        invalid("x_v is undefined for the harmonic class (b = 0)");
    const double num = 4 * pow2(p.b) * p.e - pow2(p.d);
    if(std::fabs(num) <= 1e-13 * (4 * pow2(p.b) * std::fabs(p.e) + pow2(p.d)))
        return 0;
    return num / (4 * p.b * p.discriminant());
}

PotentialClass classify(const ParabolaParams& p)
{
    validate(p);
    if(p.b == 0)
        return {PotentialKind::Harmonic, false};
    const double xv = vertexAbscissa(p);
    if(p.b < 0)
        return {PotentialKind::Bounded, false};
    if(xv > 0)
        return {PotentialKind::Hollowed, false};
    return {PotentialKind::Henon, xv == 0};
}

Interval domain(const ParabolaParams& p)
{
    const PotentialClass cls = classify(p);
    switch(cls.kind) {
        case PotentialKind::Hollowed: return {vertexAbscissa(p), Interval{}.hi};
        case PotentialKind::Bounded:  return {0, vertexAbscissa(p)};
        default:                      return {0, Interval{}.hi};
    }
}

double yValue(const ParabolaParams& p, double x)
{
    requireInDomain(p, x);
    if(p.b == 0)
        return -(p.c / p.d) * x - p.e / p.d - (pow2(p.a) / p.d) * x * x;
    const double s = std::sqrt(std::max(radicand(p, x), 0.0));
    return -(p.a / p.b) * x - p.d / (2 * pow2(p.b)) - s / pow2(p.b);
}

Derivatives yAll(const ParabolaParams& p, double x)
{
    requireInDomain(p, x);
    Derivatives der;
    der.y = yValue(p, x);
    if(p.b == 0) {
        der.d1 = -p.c / p.d - 2 * (pow2(p.a) / p.d) * x;
        der.d2 = -2 * pow2(p.a) / p.d;
        return der;
    }
    const double arg = radicand(p, x);
    if(!(arg > 0))
        throw Error(ErrorKind::SingularPoint,
            "derivatives of Y diverge at the vertical tangent x_v = " + formatNumber(x));
    const double delta = p.discriminant();
    const double s = std::sqrt(arg);
    der.d1 = -p.a / p.b - delta / (2 * p.b * s);
    der.d2 = pow2(delta) / (4 * s * s * s);
    der.d3 = -3 * p.b * delta * pow2(delta) / (8 * pow2(s * s) * s);
    der.d4 = 15 * pow2(p.b * pow2(delta)) / (16 * pow2(s * s * s) * s);
    return der;
}

std::vector<double> yDerivatives(const ParabolaParams& p, double x, int order)
{
    if(order < 1 || order > 4)
        throw Error(ErrorKind::InvalidParams, "derivative order must lie in 1..4");
    const Derivatives der = yAll(p, x);
    const std::array<double, 4> all{der.d1, der.d2, der.d3, der.d4};
    return {all.begin(), all.begin() + order};
}

double psiValue(const ParabolaParams& p, double r)
{
    if(!(r > 0))
        throw Error(ErrorKind::OutOfDomain, "radius must be positive");
    const double x = 2 * r * r;
    return yValue(p, x) / x;
}

double psiDerivative(const ParabolaParams& p, double r)
{
    if(!(r > 0))
        throw Error(ErrorKind::OutOfDomain, "radius must be positive");
    // psi = Y(x)/x, dx/dr = 4r
    const double x = 2 * r * r;
    const Derivatives der = yAll(p, x);
    return 4 * r * (x * der.d1 - der.y) / (x * x);
}

ParabolaParams applyGauge(const ParabolaParams& p, GaugeTerm g)
{
    validate(p);
    ParabolaParams q = p;
    if(p.b == 0) {
        q.c = p.c - g.eps_gauge * p.d;
        q.e = p.e - g.lam_gauge * p.d;
    } else {
        // b delta and 4 b^2 e - d^2 are kept, so the square-root part of Y is unchanged
        const double delta = p.discriminant();
        q.a = p.a - g.eps_gauge * p.b;
        q.d = p.d - 2 * g.lam_gauge * pow2(p.b);
        q.c = (q.a * q.d - delta) / p.b;
        q.e = p.e + (pow2(q.d) - pow2(p.d)) / (4 * pow2(p.b));
    }
    validate(q);
    return q;
}

namespace {
void requirePositive(double v, const char* name)
{
    if(!(v > 0) || !std::isfinite(v))
        invalid(std::string(name) + " must be positive");
}
}

ParabolaParams fromKepler(double mu)
{
    requirePositive(mu, "mu");
    return {0, 1, -2 * mu * mu, 0, 0};
}

ParabolaParams fromHarmonic(double omega)
{
    requirePositive(omega, "omega");
    return {-omega / 2, 0, 0, -4, 0};
}

ParabolaParams fromHenon(double mu, double beta)
{
    requirePositive(mu, "mu");
    requirePositive(beta, "beta");
    return {0, 1, -2 * mu * mu, -4 * mu * beta, 0};
}

ParabolaParams fromBounded(double mu, double beta)
{
    requirePositive(mu, "mu");
    requirePositive(beta, "beta");
    return {0, -1, 2 * mu * mu, -4 * mu * beta, 0};
}

ParabolaParams fromHollowed(double mu, double beta)
{
    requirePositive(mu, "mu");
    requirePositive(beta, "beta");
    return {0, 1, -2 * mu * mu, 0, 4 * pow2(mu * beta)};
}

double parabolaOdeResidual(const ParabolaParams& p, double x)
{
    const Derivatives der = yAll(p, x);
    return 3 * der.d2 * der.d4 - 5 * pow2(der.d3);
}

// ---------------------------------------------------------------------------------------------

ParabolaCurve::ParabolaCurve(const ParabolaParams& params) :
    params_(params), domain_(potential::domain(params))
{}

std::string ParabolaCurve::name() const
{
    std::ostringstream s;
    s.precision(17);
    s << toString(classify(params_).kind) << "(" << params_.a << "," << params_.b << ","
      << params_.c << "," << params_.d << "," << params_.e << ")";
    return s.str();
}

FunctionCurve::FunctionCurve(std::function<double(double)> y, Interval domain, std::string name) :
    y_(std::move(y)), domain_(domain), name_(std::move(name))
{}

double FunctionCurve::value(double x) const
{
    if(!domain_.contains(x))
        throw Error(ErrorKind::OutOfDomain, name_ + ": x = " + formatNumber(x) + " outside domain");
    return y_(x);
}

Derivatives FunctionCurve::derivatives(double x) const
{
    if(!domain_.containsInterior(x))
        throw Error(ErrorKind::OutOfDomain,
            name_ + ": finite differences need an interior point, got x = " + formatNumber(x));
    // steps near eps^(1/(n+4)) balance truncation and rounding for 4th-order stencils
    const double scale = x != 0 ? std::fabs(x) : 1.0;
    const double room = std::min(x - domain_.lo, domain_.hi - x) / 3.5;
    auto step = [&](double rel) { return std::min(rel * scale, room); };
    auto f = [&](double h, int k) { return y_(x + k * h); };

    Derivatives der;
    der.y = y_(x);
    double h = step(1e-3);
    der.d1 = (-f(h, 2) + 8 * f(h, 1) - 8 * f(h, -1) + f(h, -2)) / (12 * h);
    h = step(3e-3);
    der.d2 = (-f(h, 2) + 16 * f(h, 1) - 30 * der.y + 16 * f(h, -1) - f(h, -2)) / (12 * h * h);
    h = step(6e-3);
    der.d3 = (-f(h, 3) + 8 * f(h, 2) - 13 * f(h, 1) + 13 * f(h, -1) - 8 * f(h, -2) + f(h, -3)) /
        (8 * h * h * h);
    h = step(1e-2);
    der.d4 = (-f(h, 3) + 12 * f(h, 2) - 39 * f(h, 1) + 56 * der.y - 39 * f(h, -1) +
        12 * f(h, -2) - f(h, -3)) / (6 * pow2(h * h));
    return der;
}

CurvePtr powerLawCurve(double exponent, double scale)
{
    std::ostringstream name;
    name << "PowerLaw(" << scale << "*x^" << exponent << ")";
    return std::make_shared<FunctionCurve>(
        [exponent, scale](double x) { return scale * std::pow(x, exponent); },
        Interval{0, Interval{}.hi}, name.str());
}

CurvePtr plummerCurve(double mu, double b)
{
    requirePositive(mu, "mu");
    requirePositive(b, "b");
    std::ostringstream name;
    name << "Plummer(mu=" << mu << ",b=" << b << ")";
    return std::make_shared<FunctionCurve>(
        [mu, b](double x) { return -mu * x / std::sqrt(x / 2 + b * b); },
        Interval{0, Interval{}.hi}, name.str());
}

double odeResidual(const Curve& curve, double x)
{
    const Derivatives der = curve.derivatives(x);
    return 3 * der.d2 * der.d4 - 5 * pow2(der.d3);
}

}  // namespace potential
}  // namespace isochrone
