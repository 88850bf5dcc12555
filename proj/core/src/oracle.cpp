#include "isochrone/oracle.hpp"
#include "isochrone/error.hpp"
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

namespace isochrone::oracle {

namespace {

using std::numbers::pi;

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

void requireOrbitConstants(const OrbitConstants& oc)
{
    if(!std::isfinite(oc.xi) || !(oc.lam > 0) || !std::isfinite(oc.lam))
        fail(ErrorKind::InvalidParams, "oracle needs finite xi and Lambda > 0");
}

/// Root of f on [lo, hi] with a sign change; returns the final bracket end where f >= 0 when
/// keepPositiveSide is set, the other end otherwise.
template<typename F>
double bracketedRoot(F f, double lo, double hi, double flo, double fhi, bool keepPositiveSide)
{
    boost::uintmax_t iters = 200;
    const auto res = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
        boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1), iters);
    const double a = res.first, b = res.second;
    if(a == b)
        return a;
    const double fa = f(a);
    return (fa >= 0) == keepPositiveSide ? a : b;
}

/// Zero of an increasing function g on the open potential domain.
template<typename G>
double increasingRoot(G g, const RadialPotential& pot, ErrorKind failure, const char* what)
{
    double lo, hi;
    if(pot.r_min > 0) {
        lo = pot.r_min * (1 + 1e-12);
    } else {
        lo = std::min(1.0, pot.r_max / 2);
        for(int i = 0; i < 1100 && g(lo) >= 0; ++i)
            lo /= 2;
    }
    double glo = g(lo);
    if(!(glo < 0))
        fail(failure, std::string(what) + ": no sign change near the inner edge of the domain");
    double ghi;
    if(std::isfinite(pot.r_max)) {
        hi = pot.r_max * (1 - 1e-12);
        ghi = g(hi);
    } else {
        hi = std::max(2 * lo, 1.0);
        ghi = g(hi);
        for(int i = 0; i < 1100 && !(ghi > 0); ++i) {
            lo = hi;
            glo = ghi;
            hi *= 2;
            ghi = g(hi);
        }
    }
    if(!(ghi > 0))
        fail(failure, std::string(what) + ": no sign change inside the domain");
    return bracketedRoot(g, lo, hi, glo, ghi, true);
}

/// r^2 p_r^2 = 2 (xi - psi) r^2 - Lambda^2, positive strictly between the turning points
double momentumSquared(const RadialPotential& pot, const OrbitConstants& oc, double r)
{
    return 2 * (oc.xi - pot.psi(r)) * r * r - oc.lam * oc.lam;
}

/// d^2/dr^2 of the effective potential at r
double effectiveCurvature(const RadialPotential& pot, double lam, double r)
{
    double h = 1e-4 * r;
    h = std::min(h, (r - pot.r_min) / 3);
    if(std::isfinite(pot.r_max))
        h = std::min(h, (pot.r_max - r) / 3);
    const auto& d = pot.dpsi;
    const double d2psi = (-d(r + 2 * h) + 8 * d(r + h) - 8 * d(r - h) + d(r - 2 * h)) / (12 * h);
    return d2psi + 3 * lam * lam / std::pow(r, 4);
}

enum class Integrand { Period, Angle, Action };

QuadratureResult integrate(const RadialPotential& pot, const OrbitConstants& oc, double tol, Integrand kind)
{
    requireOrbitConstants(oc);
    if(!(tol > 0) || !(tol < 1))
        fail(ErrorKind::InvalidParams, "quadrature tolerance must lie in (0, 1)");
    const RadialRange rr = radialRange(pot, oc);
    QuadratureResult out;
    if(rr.circular) {
        // small-oscillation limit around the circular orbit
        const double kappa = std::sqrt(effectiveCurvature(pot, oc.lam, rr.r_c));
        const double T = 2 * pi / kappa;
        out.evaluations = 4;
        switch(kind) {
            case Integrand::Period: out.value = T; break;
            case Integrand::Angle:  out.value = T * oc.lam / (rr.r_c * rr.r_c); break;
            case Integrand::Action: out.value = 0; break;
        }
        return out;
    }

    // r = r_p + (r_a - r_p) sin^2 u removes the inverse square-root end-point singularities.
    // With w = r^2 p_r^2 = width^2 sin^2 u cos^2 u g(r), every integrand is smooth in g.
    const double r_p = rr.r_p, r_a = rr.r_a, width = r_a - r_p;
    const double l2 = oc.lam * oc.lam;
    // g at the ends from dw/dr = 2 Lambda^2 / r - 2 r^2 dpsi/dr, which suffers no cancellation
    const double g_p = (2 * l2 / r_p - 2 * r_p * r_p * pot.dpsi(r_p)) / width;
    const double g_a = -(2 * l2 / r_a - 2 * r_a * r_a * pot.dpsi(r_a)) / width;
    // inside a thin layer at each end w is dominated by rounding; g is interpolated linearly in
    // sin^2 u between its end-point value and its value at the layer edge. The layer has to stay
    // well inside the distance to a domain edge, where g varies on that much shorter scale.
    constexpr double kLayer = 1e-5, kEdgeFraction = 1e-3;
    const double edge_p = (r_p - pot.r_min) / width;
    const double edge_a = std::isfinite(pot.r_max) ? (pot.r_max - r_a) / width : INFINITY;
    const double layer_p = std::min(kLayer, kEdgeFraction * edge_p);
    const double layer_a = std::min(kLayer, kEdgeFraction * edge_a);
    auto gDirect = [&](double s2) {
        const double c2 = 1 - s2;
        return momentumSquared(pot, oc, r_p + width * s2) / (width * width * s2 * c2);
    };
    const double g_pl = gDirect(layer_p), g_al = gDirect(1 - layer_a);
    std::size_t count = 0;
    auto f = [&](double u) {
        ++count;
        const double s2 = std::pow(std::sin(u), 2), c2 = std::pow(std::cos(u), 2);
        const double r = r_p + width * s2;
        double g;
        if(s2 < layer_p)
            g = g_p + (g_pl - g_p) * s2 / layer_p;
        else if(c2 < layer_a)
            g = g_a + (g_al - g_a) * c2 / layer_a;
        else
            g = momentumSquared(pot, oc, r) / (width * width * s2 * c2);
        g = std::max(g, std::numeric_limits<double>::min());
        switch(kind) {
            case Integrand::Period: return 4 * r / std::sqrt(g);
            case Integrand::Angle:  return 4 * oc.lam / (r * std::sqrt(g));
            case Integrand::Action: return 2 * width * width * s2 * c2 * std::sqrt(g) / (pi * r);
        }
        return 0.0;
    };
    // the layer edges are kinks of the interpolated integrand, so they become panel boundaries
    const double u1 = std::asin(std::sqrt(layer_p)), u2 = std::acos(std::sqrt(layer_a));
    const std::array<double, 4> cuts{0.0, u1, u2, pi / 2};
    double err = 0, L1 = 0;
    out.value = 0;
    for(std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double e = 0, l1 = 0;
        out.value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15, tol, &e, &l1);
        err += e;
        L1 += l1;
    }
    out.error_estimate = err;
    out.evaluations = count;
    if(!std::isfinite(out.value) || err > 1e3 * tol * L1)
        fail(ErrorKind::ToleranceNotMet, "quadrature error estimate " + num(err) + " for value " + num(out.value));
    return out;
}

using State = std::array<double, 3>;

/// sqrt(x / 2), nudged so that 2 r^2 lands inside the closed domain despite rounding
double radiusInside(double x, const potential::Interval& dom, bool lower)
{
    if(!std::isfinite(x))
        return x;
    double r = std::sqrt(x / 2);
    while(!dom.contains(2 * r * r))
        r = std::nextafter(r, lower ? std::numeric_limits<double>::infinity() : 0.0);
    return r;
}

}  // namespace

RadialPotential RadialPotential::fromParabola(const ParabolaParams& params)
{
    const potential::Interval dom = potential::domain(params);
    RadialPotential pot;
    pot.psi = [params](double r) { return potential::psiValue(params, r); };
    pot.dpsi = [params](double r) { return potential::psiDerivative(params, r); };
    pot.r_min = radiusInside(dom.lo, dom, true);
    pot.r_max = radiusInside(dom.hi, dom, false);
    pot.name = potential::ParabolaCurve(params).name();
    return pot;
}

RadialPotential RadialPotential::fromCurve(potential::CurvePtr curve)
{
    if(!curve)
        fail(ErrorKind::InvalidParams, "null curve");
    const potential::Interval dom = curve->domain();
    RadialPotential pot;
    pot.psi = [curve](double r) {
        const double x = 2 * r * r;
        return curve->value(x) / x;
    };
    pot.dpsi = [curve](double r) {
        const double x = 2 * r * r;
        const potential::Derivatives der = curve->derivatives(x);
        return 4 * r * (x * der.d1 - der.y) / (x * x);
    };
    pot.r_min = radiusInside(dom.lo, dom, true);
    pot.r_max = radiusInside(dom.hi, dom, false);
    pot.name = curve->name();
    return pot;
}

RadialPotential RadialPotential::plummer(double mu, double b)
{
    if(!(mu > 0) || !(b > 0))
        fail(ErrorKind::InvalidParams, "Plummer sphere needs mu > 0 and b > 0");
    RadialPotential pot;
    pot.psi = [mu, b](double r) { return -mu / std::sqrt(r * r + b * b); };
    pot.dpsi = [mu, b](double r) {
        const double s = r * r + b * b;
        return mu * r / (s * std::sqrt(s));
    };
    std::ostringstream name;
    name << "Plummer(mu=" << mu << ",b=" << b << ")";
    pot.name = name.str();
    return pot;
}

RadialRange radialRange(const RadialPotential& pot, const OrbitConstants& oc)
{
    requireOrbitConstants(oc);
    const double l2 = oc.lam * oc.lam;
    RadialRange rr;
    rr.r_c = increasingRoot([&](double r) { return pot.dpsi(r) - l2 / (r * r * r); }, pot,
        ErrorKind::NoBoundOrbit, "circular radius");
    auto F = [&](double r) { return momentumSquared(pot, oc, r); };
    const double Fc = F(rr.r_c);
    const double scale = l2 + std::fabs(2 * oc.xi * rr.r_c * rr.r_c);
    if(Fc <= 1e-14 * scale) {
        if(Fc < -1e-14 * scale)
            fail(ErrorKind::NoBoundOrbit, "energy " + num(oc.xi) + " lies below the effective-potential minimum");
        rr.r_p = rr.r_a = rr.r_c;
        rr.circular = true;
        return rr;
    }

    // inner turning point
    double lo = pot.r_min;
    double Flo = lo > 0 ? F(lo) : -l2;
    if(lo == 0) {
        lo = rr.r_c / 2;
        Flo = F(lo);
        for(int i = 0; i < 1100 && Flo >= 0; ++i) {
            lo /= 2;
            Flo = F(lo);
        }
    }
    if(!(Flo < 0))
        fail(ErrorKind::NoBoundOrbit, "orbit reaches the inner edge of the domain");
    rr.r_p = bracketedRoot(F, lo, rr.r_c, Flo, Fc, true);

    // outer turning point
    double hi, Fhi;
    if(std::isfinite(pot.r_max)) {
        hi = pot.r_max;
        Fhi = F(hi);
    } else {
        hi = 2 * rr.r_c;
        Fhi = F(hi);
        for(int i = 0; i < 1100 && Fhi >= 0; ++i) {
            hi *= 2;
            Fhi = F(hi);
        }
    }
    if(!(Fhi < 0))
        fail(ErrorKind::NoBoundOrbit, "orbit reaches the outer edge of the domain or escapes");
    rr.r_a = bracketedRoot(F, rr.r_c, hi, Fc, Fhi, true);
    return rr;
}

QuadratureResult quadRadialPeriod(const RadialPotential& pot, const OrbitConstants& oc, double tol)
{
    return integrate(pot, oc, tol, Integrand::Period);
}

QuadratureResult quadApsidalAngle(const RadialPotential& pot, const OrbitConstants& oc, double tol)
{
    return integrate(pot, oc, tol, Integrand::Angle);
}

QuadratureResult quadRadialAction(const RadialPotential& pot, const OrbitConstants& oc, double tol)
{
    return integrate(pot, oc, tol, Integrand::Action);
}

std::vector<OdeState> integrateOrbit(const RadialPotential& pot, const OrbitConstants& oc,
    std::span<const double> times, double reltol)
{
    namespace odeint = boost::numeric::odeint;
    requireOrbitConstants(oc);
    if(!(reltol > 0) || !(reltol < 1))
        fail(ErrorKind::InvalidParams, "ODE tolerance must lie in (0, 1)");
    if(times.empty())
        return {};
    for(std::size_t i = 0; i < times.size(); ++i)
        if(!std::isfinite(times[i]) || times[i] < 0 || (i > 0 && times[i] < times[i - 1]))
            fail(ErrorKind::InvalidParams, "sample times must be finite, non-negative and sorted");

    const RadialRange rr = radialRange(pot, oc);
    const double lam = oc.lam;
    auto rhs = [&](const State& s, State& ds, double) {
        const double r = s[0];
        if(!(r > pot.r_min) || !(r < pot.r_max))
            fail(ErrorKind::DomainExit, "trajectory left the domain at r = " + num(r));
        ds[0] = s[1];
        ds[1] = lam * lam / (r * r * r) - pot.dpsi(r);
        ds[2] = lam / (r * r);
    };

    std::vector<double> grid;
    grid.reserve(times.size() + 1);
    const bool prepend = times.front() > 0;
    if(prepend)
        grid.push_back(0);
    grid.insert(grid.end(), times.begin(), times.end());

    std::vector<OdeState> out;
    out.reserve(grid.size());
    double maxDrift = 0;
    const double escale = std::max(std::fabs(oc.xi), 1e-300);
    auto observer = [&](const State& s, double t) {
        const double r = s[0];
        const double energy = 0.5 * s[1] * s[1] + lam * lam / (2 * r * r) + pot.psi(r);
        maxDrift = std::max(maxDrift, std::fabs(energy - oc.xi) / escale);
        // Lambda enters the equations as a fixed parameter, so r^2 dtheta/dt is exact
        out.push_back({t, r, s[1], s[2], maxDrift, 0.0});
    };

    State state{rr.r_p, 0, 0};
    const double span = grid.back() > 0 ? grid.back() : 1.0;
    auto stepper = odeint::make_controlled(reltol * 1e-3 * rr.r_p, reltol,
        odeint::runge_kutta_fehlberg78<State>());
    try {
        odeint::integrate_times(stepper, rhs, state, grid.begin(), grid.end(), 1e-6 * span, observer,
            odeint::max_step_checker(100000));
    } catch(const Error& e) {
        if(e.kind() == ErrorKind::OutOfDomain || e.kind() == ErrorKind::SingularPoint)
            fail(ErrorKind::DomainExit, e.what());
        throw;
    } catch(const odeint::odeint_error& e) {
        fail(ErrorKind::StepSizeUnderflow, e.what());
    }
    if(prepend)
        out.erase(out.begin());
    return out;
}

std::vector<OdeState> integrateOrbit(const RadialPotential& pot, const OrbitConstants& oc,
    double t_end, std::size_t n, double reltol)
{
    if(!(t_end > 0) || n == 0)
        fail(ErrorKind::InvalidParams, "integration needs t_end > 0 and at least one interval");
    std::vector<double> times(n + 1);
    for(std::size_t i = 0; i <= n; ++i)
        times[i] = t_end * static_cast<double>(i) / static_cast<double>(n);
    times.back() = t_end;
    return integrateOrbit(pot, oc, times, reltol);
}

double isochronySpread(const RadialPotential& pot, double xi, std::span<const double> lam_grid, double tol)
{
    if(lam_grid.empty())
        fail(ErrorKind::InvalidParams, "angular-momentum grid is empty");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
    for(double lam : lam_grid) {
        const double T = quadRadialPeriod(pot, {xi, lam}, tol).value;
        lo = std::min(lo, T);
        hi = std::max(hi, T);
        sum += T;
    }
    return (hi - lo) / (sum / static_cast<double>(lam_grid.size()));
}

double maxAngularMomentum(const RadialPotential& pot, double xi)
{
    if(!std::isfinite(xi))
        fail(ErrorKind::InvalidParams, "energy must be finite");
    // energy of the circular orbit through r, increasing in r
    auto g = [&](double r) { return pot.psi(r) + 0.5 * r * pot.dpsi(r) - xi; };
    const double r = increasingRoot(g, pot, ErrorKind::NoBoundOrbit, "circular orbit at this energy");
    return std::sqrt(r * r * r * pot.dpsi(r));
}

double minAngularMomentum(const RadialPotential& pot, double xi)
{
    if(!std::isfinite(pot.r_max))
        return 0;
    // below this the effective potential at the outer edge drops under xi
    const double r = pot.r_max;
    return std::sqrt(std::max(0.0, 2 * r * r * (xi - pot.psi(r))));
}

std::vector<double> admissibleLambdaGrid(const RadialPotential& pot, double xi, std::size_t n,
    double lo_frac, double hi_frac)
{
    if(n == 0 || !(lo_frac > 0) || !(hi_frac < 1) || !(lo_frac <= hi_frac))
        fail(ErrorKind::InvalidParams, "grid needs n > 0 and 0 < lo_frac <= hi_frac < 1");
    const double lmax = maxAngularMomentum(pot, xi);
    const double lmin = minAngularMomentum(pot, xi);
    std::vector<double> grid(n);
    for(std::size_t i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.5 * (lo_frac + hi_frac)
                                : lo_frac + (hi_frac - lo_frac) * static_cast<double>(i) / static_cast<double>(n - 1);
        grid[i] = lmin + f * (lmax - lmin);
    }
    return grid;
}

}  // namespace isochrone::oracle
