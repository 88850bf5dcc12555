/** \file    oracle.hpp
    \brief   Numerical ground truth for radial orbits in an arbitrary spherical potential

    Radial period, apsidal angle and radial action come from adaptive Gauss-Kronrod quadrature
    of their integral definitions; trajectories come from an embedded Runge-Kutta integration
    of the equations of motion. Nothing here uses the closed-form orbit theory: the only input
    is psi(r) and dpsi/dr.
*/
#pragma once
#include "isochrone/analytic.hpp"
#include "isochrone/potential.hpp"
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace isochrone::oracle {

using analytic::OrbitConstants;
using potential::ParabolaParams;

/// A spherical potential psi(r) given pointwise, defined on [r_min, r_max].
struct RadialPotential {
    std::function<double(double)> psi;
    std::function<double(double)> dpsi;
    double r_min = 0;
    double r_max = std::numeric_limits<double>::infinity();
    std::string name;

    /// psi and dpsi/dr evaluated from Y and Y' of the parabola only.
    static RadialPotential fromParabola(const ParabolaParams& params);
    /// psi from a Hénon-variable curve; dpsi/dr from the curve's first derivative.
    static RadialPotential fromCurve(potential::CurvePtr curve);
    /// psi = -mu / sqrt(r^2 + b^2)
    static RadialPotential plummer(double mu, double b);

    double effective(double r, double lam) const { return psi(r) + lam * lam / (2 * r * r); }
};

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0;
    std::size_t evaluations = 0;
};

struct RadialRange {
    double r_p = 0;
    double r_a = 0;
    double r_c = 0;        ///< minimum of the effective potential
    bool circular = false; ///< turning points closer than the root finder can resolve
};

struct OdeState {
    double t = 0;
    double r = 0;
    double rdot = 0;
    double theta = 0;
    double energy_drift = 0;  ///< running maximum of |E(t) - xi| / max(|xi|, 1e-300)
    double lambda_drift = 0;  ///< running maximum of |r^2 dtheta/dt - Lambda| / Lambda
};

inline constexpr double kDefaultQuadTol = 1e-12;
inline constexpr double kDefaultOdeRelTol = 1e-10;

/// Periastron and apoastron radii found by bracketing the effective potential.
RadialRange radialRange(const RadialPotential& pot, const OrbitConstants& oc);

QuadratureResult quadRadialPeriod(const RadialPotential& pot, const OrbitConstants& oc,
    double tol = kDefaultQuadTol);
QuadratureResult quadApsidalAngle(const RadialPotential& pot, const OrbitConstants& oc,
    double tol = kDefaultQuadTol);
QuadratureResult quadRadialAction(const RadialPotential& pot, const OrbitConstants& oc,
    double tol = kDefaultQuadTol);

/// Integrates (r, rdot, theta) from periastron and reports the state at each requested time.
std::vector<OdeState> integrateOrbit(const RadialPotential& pot, const OrbitConstants& oc,
    std::span<const double> times, double reltol = kDefaultOdeRelTol);

/// Same, sampled at n + 1 equally spaced times on [0, t_end].
std::vector<OdeState> integrateOrbit(const RadialPotential& pot, const OrbitConstants& oc,
    double t_end, std::size_t n, double reltol = kDefaultOdeRelTol);

/// (max - min) / mean of the quadrature radial period over lam_grid at energy xi.
double isochronySpread(const RadialPotential& pot, double xi, std::span<const double> lam_grid,
    double tol = kDefaultQuadTol);

/// Largest angular momentum with a bound orbit at energy xi (that of the circular orbit).
double maxAngularMomentum(const RadialPotential& pot, double xi);

/// Smallest angular momentum whose orbit at energy xi stays inside a bounded domain (0 otherwise).
double minAngularMomentum(const RadialPotential& pot, double xi);

/// n values of Lambda spread over the fractions (lo_frac, hi_frac) of [minAngularMomentum, maxAngularMomentum].
std::vector<double> admissibleLambdaGrid(const RadialPotential& pot, double xi, std::size_t n,
    double lo_frac = 0.1, double hi_frac = 0.9);

}  // namespace isochrone::oracle
