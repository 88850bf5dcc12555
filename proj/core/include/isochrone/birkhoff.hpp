/** \file    birkhoff.hpp
    \brief   Birkhoff invariants of circular orbits and the identities that characterise isochrony

    At fixed angular momentum the radial Hamiltonian has an elliptic equilibrium (the circular
    orbit). Its Birkhoff normal form l + b rho + B rho^2 / 2 can be read either from the
    potential near the circular abscissa x_c or from the period function T(xi); both must agree
    for isochrone potentials. The same machinery checks Bertrand's theorem, the generalised third
    law and the SL(2,Z)-invariant scalars built from the frequency map.
*/
#pragma once
#include "isochrone/potential.hpp"
#include <span>
#include <string_view>
#include <vector>

namespace isochrone::birkhoff {

using potential::Curve;
using potential::ParabolaParams;

enum class Route { FromPotential, FromPeriod };

std::string_view toString(Route route);

struct BirkhoffInvariants {
    double l = 0;      ///< energy of the circular orbit
    double b_inv = 0;  ///< radial frequency of the circular orbit
    double B_inv = 0;  ///< second-order coefficient
    Route route = Route::FromPotential;
};

struct FrequencyInvariants {
    double J_inv = 0;  ///< d omega / dJ ^ omega, vanishes for isochrones
    double G_inv = 0;  ///< omega ^ d omega / dLambda
    double T_inv = 0;  ///< torsion d omega / dJ ^ d omega / dLambda
};

/// Relative residuals of the isochrony identities at one angular momentum.
struct TheoremRow {
    double lam = 0;
    double birkhoff_ode = 0;   ///< B dl/dLambda - b db/dLambda
    double parabola_ode = 0;   ///< 3 Y2 Y4 - 5 Y3^2 at x_c
    double xc_identity = 0;    ///< x_c' x_c Y2 - 2 Lambda
    double energy_slope = 0;   ///< dl/dLambda - x_c' Y2
};

struct TheoremReport {
    std::vector<TheoremRow> rows;
    double max_birkhoff_ode = 0;
    double max_parabola_ode = 0;
};

struct BertrandReport {
    double q_fit = 0;             ///< least-squares Q in dl/dLambda = Q b
    double residual = 0;          ///< max |q_i - Q| / |Q|
    std::vector<double> q_local;  ///< dl/dLambda / b on each grid point
};

/// Relative step of the (fourth-order) central differences in Lambda.
inline constexpr double kLambdaStep = 1e-4;

/// Solves x Y'(x) - Y(x) = Lambda^2 (safeguarded Newton on a monotone map).
double circularAbscissa(const Curve& curve, double lam);
double circularAbscissa(const ParabolaParams& params, double lam);

/// Solves Y'(x) = xi, the circular orbit of energy xi.
double circularAbscissaAtEnergy(const Curve& curve, double xi);

BirkhoffInvariants invariantsFromPotential(const Curve& curve, double lam);
BirkhoffInvariants invariantsFromPotential(const ParabolaParams& params, double lam);

/// Uses the closed-form period function; parabola inputs only.
BirkhoffInvariants invariantsFromPeriod(const ParabolaParams& params, double lam);

TheoremReport isochroneTheoremCheck(const Curve& curve, std::span<const double> lam_grid);
TheoremReport isochroneTheoremCheck(const ParabolaParams& params, std::span<const double> lam_grid);

BertrandReport bertrandCheck(const Curve& curve, std::span<const double> lam_grid);
BertrandReport bertrandCheck(const ParabolaParams& params, std::span<const double> lam_grid);

/// T = pi / sqrt(2 Y''(x_c(xi))).
double thirdLaw(const Curve& curve, double xi);
double thirdLaw(const ParabolaParams& params, double xi);

FrequencyInvariants frequencyInvariants(const ParabolaParams& params, double J, double lam);

}  // namespace isochrone::birkhoff
