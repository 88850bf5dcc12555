/** \file    potential.hpp
    \brief   Isochrone potentials represented as convex parabola arcs in Hénon variables

    A radial potential psi(r) is mapped to the curve Y(x) = x psi(r) with x = 2 r^2.
    Isochrone potentials are exactly those for which Y is a convex arc of the parabola
    (a x + b y)^2 + c x + d y + e = 0, described here by its five coefficients.
*/
#pragma once
#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace isochrone::potential {

/// Coefficients of the implicit parabola (a x + b y)^2 + c x + d y + e = 0.
struct ParabolaParams {
    double a = 0, b = 0, c = 0, d = 0, e = 0;

    /// delta = a d - b c, positive for every admissible parabola
    double discriminant() const { return a * d - b * c; }
    bool isHarmonic() const { return b == 0; }
    bool operator==(const ParabolaParams&) const = default;
};

enum class PotentialKind { Harmonic, Henon, Bounded, Hollowed };

std::string_view toString(PotentialKind kind);

struct PotentialClass {
    PotentialKind kind = PotentialKind::Henon;
    /// Hénon-type parabola passing through its vertex at the origin (x_v = 0): Kepler up to a gauge
    bool kepler_degenerate = false;
    bool operator==(const PotentialClass&) const = default;
};

/// Adds eps_gauge + lam_gauge / (2 r^2) to psi(r), i.e. eps_gauge x + lam_gauge to Y(x).
struct GaugeTerm {
    double eps_gauge = 0;
    double lam_gauge = 0;
};

/// Closed interval of the Hénon abscissa; hi may be +infinity.
struct Interval {
    double lo = 0;
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool containsInterior(double x) const { return x > lo && x < hi; }
    bool isBounded() const { return hi < std::numeric_limits<double>::infinity(); }
};

/// Y and its first four derivatives at one abscissa.
struct Derivatives {
    double y = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0;
};

/// Throws Error(InvalidParams) naming the violated invariant.
void validate(const ParabolaParams& params);

/// Abscissa x_v of the vertical tangent, (4 b^2 e - d^2) / (4 b delta); requires b != 0.
/// Values within rounding of zero (relative to the terms) are returned as exactly zero.
double vertexAbscissa(const ParabolaParams& params);

PotentialClass classify(const ParabolaParams& params);

/// Physical part of the convex branch, in x.
Interval domain(const ParabolaParams& params);

double yValue(const ParabolaParams& params, double x);

/// Returns [Y'(x), ..., Y^(order)(x)] for order in 1..4, from closed forms of the convex branch.
std::vector<double> yDerivatives(const ParabolaParams& params, double x, int order);

/// Y and all four derivatives in one call (closed form).
Derivatives yAll(const ParabolaParams& params, double x);

double psiValue(const ParabolaParams& params, double r);

/// d psi / d r, obtained from Y and Y' only.
double psiDerivative(const ParabolaParams& params, double r);

ParabolaParams applyGauge(const ParabolaParams& params, GaugeTerm gauge);

// Canonical Latin tuples for the named families (zero linear term, b = +-1 or d = -4).
ParabolaParams fromKepler(double mu);
ParabolaParams fromHarmonic(double omega);
ParabolaParams fromHenon(double mu, double beta);
ParabolaParams fromBounded(double mu, double beta);
ParabolaParams fromHollowed(double mu, double beta);

/// 3 Y'' Y'''' - 5 (Y''')^2 from closed-form derivatives; vanishes for every parabola.
double parabolaOdeResidual(const ParabolaParams& params, double x);

// ---------------------------------------------------------------------------------------------
// Generic curves Y(x): the same operations for potentials that are not parabolas

/// A potential expressed in Hénon variables.
class Curve {
public:
    virtual ~Curve() = default;
    virtual double value(double x) const = 0;
    virtual Derivatives derivatives(double x) const = 0;
    virtual Interval domain() const = 0;
    virtual std::string name() const = 0;
};

using CurvePtr = std::shared_ptr<const Curve>;

/// Exact closed-form curve of an isochrone parabola.
class ParabolaCurve final : public Curve {
public:
    explicit ParabolaCurve(const ParabolaParams& params);
    double value(double x) const override { return yValue(params_, x); }
    Derivatives derivatives(double x) const override { return yAll(params_, x); }
    Interval domain() const override { return domain_; }
    std::string name() const override;
    const ParabolaParams& params() const { return params_; }
private:
    ParabolaParams params_;
    Interval domain_;
};

/// Curve given by a function handle; derivatives come from fourth-order central differences.
class FunctionCurve final : public Curve {
public:
    FunctionCurve(std::function<double(double)> y, Interval domain, std::string name);
    double value(double x) const override;
    Derivatives derivatives(double x) const override;
    Interval domain() const override { return domain_; }
    std::string name() const override { return name_; }
private:
    std::function<double(double)> y_;
    Interval domain_;
    std::string name_;
};

/// Y(x) = scale * x^exponent on [0, inf): a non-parabola unless exponent is 1/2 or 2.
CurvePtr powerLawCurve(double exponent, double scale);

/// Plummer sphere psi(r) = -mu / sqrt(r^2 + b^2) in Hénon variables.
CurvePtr plummerCurve(double mu, double b);

/// 3 Y'' Y'''' - 5 (Y''')^2 for any curve.
double odeResidual(const Curve& curve, double x);

}  // namespace isochrone::potential
