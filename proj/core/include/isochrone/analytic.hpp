/** \file    analytic.hpp
    \brief   Closed-form dynamics in an arbitrary isochrone potential

    Every bound orbit is described by two constants (energy xi, angular momentum Lambda)
    and a parabola (a,b,c,d,e). Radial period, apsidal angle, radial action, the Hamiltonian
    in action-angle variables and the parametric solution (r(E), theta(E)) in terms of an
    eccentric anomaly E obeying Omega t = E - eps sin E are all explicit.

    Conventions:
      - t = 0 at periastron, theta(0) = 0;
      - E = 0 at periastron and E = pi at apoastron for every class;
      - for left-opening parabolae (b < 0, Bounded class) the time relation reads
        Omega t = E + eps sin E, i.e. the Kepler equation with a negative eccentricity;
      - for the harmonic class E := Omega t.
*/
#pragma once
#include "isochrone/potential.hpp"
#include <span>
#include <vector>

namespace isochrone::analytic {

using potential::ParabolaParams;

struct OrbitConstants {
    double xi = 0;   ///< energy
    double lam = 0;  ///< angular momentum (> 0 for the angular part of the solution)
};

struct TurningPoints {
    double x_p = 0;  ///< periastron, 2 r_p^2
    double x_a = 0;  ///< apoastron,  2 r_a^2
};

struct OrbitElements {
    double omega_r = 0;  ///< radial frequency Omega = 2 pi / T
    double ecc = 0;      ///< eccentricity in [0, 1)
    /// alpha^2 carrying the sign of b: x(E) = x_v + 2 alpha2 (1 - sgn(b) ecc cos E)^2.
    /// Harmonic class: r_a^2.
    double alpha2 = 0;
    double x_v = 0;      ///< vertical-tangent abscissa (NaN for the harmonic class)
    /// -sgn(b) x_v / (2 |alpha^2|); negative values mean an imaginary zeta (NaN for harmonic)
    double zeta2 = 0;
    double T = 0;
    double Theta = 0;
    double J = 0;
    double x_p = 0;
    double x_a = 0;
    int sign_b = 0;      ///< -1, 0 (harmonic) or +1

    double rPeri() const;
    double rApo() const;
    bool isCircular() const;
};

struct Frequencies {
    double omega_J = 0;
    double omega_Lambda = 0;
};

struct RadiusSample {
    double x = 0;
    double r = 0;
};

/// theta(E) together with the imaginary part discarded when x_v > 0 (complex branch).
struct AngleEvaluation {
    double theta = 0;
    double imag_residual = 0;
    bool complex_branch = false;
};

struct TrajectorySample {
    double t = 0;
    double E = 0;       ///< eccentric anomaly, unwrapped (continuous across radial cycles)
    long cycle = 0;     ///< number of completed radial periods, floor(E / 2 pi)
    double x = 0;
    double r = 0;
    double theta = 0;
    double zJ = 0;      ///< radial angle variable Omega t
    double zLambda = 0; ///< azimuthal angle variable (Theta / 2 pi) Omega t
};

/// Orbits with eccentricity below this value are treated as circular.
inline constexpr double kCircularEccentricity = 1e-12;

/// eps^2 as a function of (xi, Lambda), unclipped; throws UnboundOrbit when a + b xi >= 0.
double eccentricitySquared(const ParabolaParams& params, const OrbitConstants& oc);

TurningPoints turningPoints(const ParabolaParams& params, const OrbitConstants& oc);

/// T(xi); independent of Lambda.
double radialPeriod(const ParabolaParams& params, double xi);

/// Theta(Lambda); independent of xi.
double apsidalAngle(const ParabolaParams& params, double lam);

/// R(Lambda) = sqrt(2 b^2 L^2 - d + 2 b sqrt(b^2 L^4 - d L^2 + e)), b != 0.
double actionOffset(const ParabolaParams& params, double lam);

double radialAction(const ParabolaParams& params, const OrbitConstants& oc);

/// H(J, Lambda), the energy of the orbit with radial action J.
double hamiltonian(const ParabolaParams& params, double J, double lam);

/// Energy of the circular orbit with angular momentum Lambda, H(0, Lambda).
double circularEnergy(const ParabolaParams& params, double lam);

Frequencies frequencies(const ParabolaParams& params, double J, double lam);

OrbitElements orbitElements(const ParabolaParams& params, const OrbitConstants& oc);

/// Solves E - ecc sin E = M for ecc in [0, 1) and any real M.
double solveKepler(double ecc, double meanAnomaly);

/// Eccentric anomaly of an orbit at mean anomaly M = Omega t, honouring the class conventions.
double eccentricAnomaly(const OrbitElements& elements, double meanAnomaly);

RadiusSample radiusOfE(const ParabolaParams& params, const OrbitElements& elements, double E);

double angleOfE(const ParabolaParams& params, const OrbitConstants& oc,
    const OrbitElements& elements, double E);

AngleEvaluation angleOfEDetailed(const ParabolaParams& params, const OrbitConstants& oc,
    const OrbitElements& elements, double E);

std::vector<TrajectorySample> trajectory(const ParabolaParams& params, const OrbitConstants& oc,
    std::span<const double> times);

}  // namespace isochrone::analytic
