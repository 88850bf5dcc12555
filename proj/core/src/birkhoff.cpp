#include "isochrone/birkhoff.hpp"
#include "isochrone/analytic.hpp"
#include "isochrone/error.hpp"
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace isochrone::birkhoff {

namespace {

using std::numbers::pi;

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

void requireLambda(double lam)
{
    if(!(lam > 0) || !std::isfinite(lam))
        fail(ErrorKind::InvalidParams, "angular momentum Lambda must be positive (got " + num(lam) + ")");
}

/// Root of an increasing function on the open domain of a curve. g returns (value, slope).
template<typename G>
double monotoneRoot(const Curve& curve, G g, const char* what)
{
    const potential::Interval dom = curve.domain();
    auto value = [&](double x) { return g(x).first; };

    double lo;
    if(dom.lo > 0) {
        lo = dom.lo * (1 + 1e-12);
    } else {
        lo = std::isfinite(dom.hi) ? dom.hi / 2 : 1.0;
        for(int i = 0; i < 1100 && value(lo) >= 0; ++i)
            lo /= 2;
    }
    if(!(value(lo) < 0))
        fail(ErrorKind::NoCircularOrbit, std::string(what) + " lies below the range of the curve");
    double hi;
    if(dom.isBounded()) {
        hi = dom.hi * (1 - 1e-12);
        if(!(value(hi) > 0))
            fail(ErrorKind::NoCircularOrbit, std::string(what) + " exceeds the range on the bounded domain");
    } else {
        hi = std::max(1.0, 2 * lo);
        for(int i = 0; i < 1100 && !(value(hi) > 0); ++i) {
            lo = hi;
            hi *= 2;
        }
        if(!(value(hi) > 0))
            fail(ErrorKind::NoCircularOrbit, std::string(what) + " exceeds the range of the curve");
    }

    // Newton, falling back to bisection whenever a step leaves the bracket
    double x = 0.5 * (lo + hi);
    for(int iter = 0; iter < 300; ++iter) {
        const auto [f, fp] = g(x);
        if(f == 0)
            return x;
        (f < 0 ? lo : hi) = x;
        double next = fp > 0 ? x - f / fp : 0.5 * (lo + hi);
        if(!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if(std::fabs(next - x) <= 2e-16 * std::fabs(x) || hi - lo <= 4e-16 * std::fabs(x))
            return next;
        x = next;
    }
    return x;
}

/// Fourth-order central difference in Lambda of a scalar quantity.
template<typename F>
double lambdaDerivative(F f, double lam)
{
    const double h = kLambdaStep * lam;
    return (-f(lam + 2 * h) + 8 * f(lam + h) - 8 * f(lam - h) + f(lam - 2 * h)) / (12 * h);
}

double relative(double residual, double scale)
{
    if(scale == 0)
        return residual == 0 ? 0 : std::numeric_limits<double>::infinity();
    return std::fabs(residual) / scale;
}

}  // namespace

std::string_view toString(Route route)
{
    return route == Route::FromPotential ? "FromPotential" : "FromPeriod";
}

double circularAbscissa(const Curve& curve, double lam)
{
    requireLambda(lam);
    const double l2 = lam * lam;
    const double xc = monotoneRoot(curve, [&](double x) {
        const potential::Derivatives der = curve.derivatives(x);
        return std::make_pair(x * der.d1 - der.y - l2, x * der.d2);
    }, "circular orbit of this angular momentum");
    return xc;
}

double circularAbscissa(const ParabolaParams& params, double lam)
{
    return circularAbscissa(potential::ParabolaCurve(params), lam);
}

double circularAbscissaAtEnergy(const Curve& curve, double xi)
{
    if(!std::isfinite(xi))
        fail(ErrorKind::InvalidParams, "energy must be finite");
    return monotoneRoot(curve, [&](double x) {
        const potential::Derivatives der = curve.derivatives(x);
        return std::make_pair(der.d1 - xi, der.d2);
    }, "circular orbit of this energy");
}

BirkhoffInvariants invariantsFromPotential(const Curve& curve, double lam)
{
    const double xc = circularAbscissa(curve, lam);
    const potential::Derivatives der = curve.derivatives(xc);
    if(!(der.d2 > 0))
        fail(ErrorKind::SingularPoint, "Y'' vanishes at the circular abscissa");
    BirkhoffInvariants inv;
    inv.route = Route::FromPotential;
    inv.l = der.d1;
    inv.b_inv = std::sqrt(8 * der.d2);
    inv.B_inv = 4 * der.d3 / der.d2 +
        xc / (3 * pow2(der.d2)) * (3 * der.d2 * der.d4 - 5 * pow2(der.d3));
    return inv;
}

BirkhoffInvariants invariantsFromPotential(const ParabolaParams& params, double lam)
{
    return invariantsFromPotential(potential::ParabolaCurve(params), lam);
}

BirkhoffInvariants invariantsFromPeriod(const ParabolaParams& params, double lam)
{
    requireLambda(lam);
    BirkhoffInvariants inv;
    inv.route = Route::FromPeriod;
    inv.l = analytic::circularEnergy(params, lam);
    const double T = analytic::radialPeriod(params, inv.l);
    inv.b_inv = 2 * pi / T;
    // T(xi) is constant for the harmonic class
    const double dT = params.b == 0 ? 0 : -1.5 * params.b * T / (params.a + params.b * inv.l);
    inv.B_inv = -4 * pi * pi * dT / (T * T * T);
    return inv;
}

TheoremReport isochroneTheoremCheck(const Curve& curve, std::span<const double> lam_grid)
{
    if(lam_grid.empty())
        fail(ErrorKind::InvalidParams, "angular-momentum grid is empty");
    TheoremReport report;
    for(double lam : lam_grid) {
        requireLambda(lam);
        const BirkhoffInvariants mid = invariantsFromPotential(curve, lam);
        const double dl = lambdaDerivative([&](double l) { return invariantsFromPotential(curve, l).l; }, lam);
        const double db = lambdaDerivative([&](double l) { return invariantsFromPotential(curve, l).b_inv; }, lam);

        const double xc = circularAbscissa(curve, lam);
        const double dxc = lambdaDerivative([&](double l) { return circularAbscissa(curve, l); }, lam);
        const potential::Derivatives der = curve.derivatives(xc);

        TheoremRow row;
        row.lam = lam;
        const double lhs = mid.B_inv * dl, rhs = mid.b_inv * db;
        row.birkhoff_ode = relative(lhs - rhs,
            std::max({std::fabs(lhs), std::fabs(rhs), pow2(mid.b_inv) / lam}));
        const double p1 = 3 * der.d2 * der.d4, p2 = 5 * pow2(der.d3);
        row.parabola_ode = relative(p1 - p2, std::max(std::fabs(p1), p2));
        row.xc_identity = relative(dxc * xc * der.d2 - 2 * lam, 2 * lam);
        row.energy_slope = relative(dl - dxc * der.d2, std::fabs(dxc * der.d2));
        report.max_birkhoff_ode = std::max(report.max_birkhoff_ode, row.birkhoff_ode);
        report.max_parabola_ode = std::max(report.max_parabola_ode, row.parabola_ode);
        report.rows.push_back(row);
    }
    return report;
}

TheoremReport isochroneTheoremCheck(const ParabolaParams& params, std::span<const double> lam_grid)
{
    return isochroneTheoremCheck(potential::ParabolaCurve(params), lam_grid);
}

BertrandReport bertrandCheck(const Curve& curve, std::span<const double> lam_grid)
{
    if(lam_grid.empty())
        fail(ErrorKind::InvalidParams, "angular-momentum grid is empty");
    std::vector<double> slopes, freqs;
    for(double lam : lam_grid) {
        requireLambda(lam);
        slopes.push_back(lambdaDerivative([&](double l) { return invariantsFromPotential(curve, l).l; }, lam));
        freqs.push_back(invariantsFromPotential(curve, lam).b_inv);
    }
    double num_ = 0, den = 0;
    for(std::size_t i = 0; i < slopes.size(); ++i) {
        num_ += slopes[i] * freqs[i];
        den += freqs[i] * freqs[i];
    }
    BertrandReport report;
    report.q_fit = num_ / den;
    for(std::size_t i = 0; i < slopes.size(); ++i) {
        const double q = slopes[i] / freqs[i];
        report.q_local.push_back(q);
        report.residual = std::max(report.residual, std::fabs(q - report.q_fit) / std::fabs(report.q_fit));
    }
    return report;
}

BertrandReport bertrandCheck(const ParabolaParams& params, std::span<const double> lam_grid)
{
    return bertrandCheck(potential::ParabolaCurve(params), lam_grid);
}

double thirdLaw(const Curve& curve, double xi)
{
    const double xc = circularAbscissaAtEnergy(curve, xi);
    const double y2 = curve.derivatives(xc).d2;
    if(!(y2 > 0))
        fail(ErrorKind::SingularPoint, "Y'' vanishes at the circular abscissa");
    return pi / std::sqrt(2 * y2);
}

double thirdLaw(const ParabolaParams& params, double xi)
{
    return thirdLaw(potential::ParabolaCurve(params), xi);
}

FrequencyInvariants frequencyInvariants(const ParabolaParams& params, double J, double lam)
{
    requireLambda(lam);
    if(!(J >= 0) || !std::isfinite(J))
        fail(ErrorKind::InvalidParams, "radial action must be non-negative (got " + num(J) + ")");
    auto w = [&](double j, double l) { return analytic::frequencies(params, j, l); };
    const analytic::Frequencies w0 = w(J, lam);

    const double hJ = 1e-5 * std::max(1.0, std::fabs(J));
    double dJ_J, dJ_L;
    if(J >= hJ) {
        const auto p = w(J + hJ, lam), m = w(J - hJ, lam);
        dJ_J = (p.omega_J - m.omega_J) / (2 * hJ);
        dJ_L = (p.omega_Lambda - m.omega_Lambda) / (2 * hJ);
    } else {
        // second-order one-sided stencil at the circular edge J = 0
        const auto p1 = w(J + hJ, lam), p2 = w(J + 2 * hJ, lam);
        dJ_J = (-3 * w0.omega_J + 4 * p1.omega_J - p2.omega_J) / (2 * hJ);
        dJ_L = (-3 * w0.omega_Lambda + 4 * p1.omega_Lambda - p2.omega_Lambda) / (2 * hJ);
    }
    const double hL = 1e-5 * lam;
    const auto p = w(J, lam + hL), m = w(J, lam - hL);
    const double dL_J = (p.omega_J - m.omega_J) / (2 * hL);
    const double dL_L = (p.omega_Lambda - m.omega_Lambda) / (2 * hL);

    FrequencyInvariants inv;
    inv.J_inv = dJ_J * w0.omega_Lambda - dJ_L * w0.omega_J;
    inv.G_inv = w0.omega_J * dL_L - w0.omega_Lambda * dL_J;
    inv.T_inv = dJ_J * dL_L - dJ_L * dL_J;
    return inv;
}

}  // namespace isochrone::birkhoff
