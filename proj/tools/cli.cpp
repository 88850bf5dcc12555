#include "cli.hpp"

#include "isochrone/analytic.hpp"
#include "isochrone/birkhoff.hpp"
#include "isochrone/error.hpp"
#include "isochrone/oracle.hpp"
#include "isochrone/potential.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace isochrone::cli {

namespace {

using json = nlohmann::ordered_json;
using potential::ParabolaParams;
using std::numbers::pi;

/// Bad flags, malformed values or inconsistent configuration.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------------
// number formatting

std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmtShort(double x)
{
    if(std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fmtLatin(const ParabolaParams& p)
{
    return "(" + fmtShort(p.a) + "," + fmtShort(p.b) + "," + fmtShort(p.c) + "," + fmtShort(p.d) +
        "," + fmtShort(p.e) + ")";
}

json number(double x)
{
    if(std::isfinite(x))
        return x;
    return nullptr;
}

// ---------------------------------------------------------------------------------------------
// option parsing

double parseDouble(const std::string& text, const std::string& what)
{
    double v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    while(first < last && *first == ' ')
        ++first;
    if(first < last && *first == '+')
        ++first;
    const auto res = std::from_chars(first, last, v);
    if(res.ec != std::errc() || res.ptr != last)
        throw InputError("cannot parse " + what + " from '" + text + "'");
    return v;
}

long parseLong(const std::string& text, const std::string& what)
{
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if(res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw InputError("cannot parse integer " + what + " from '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while(std::getline(in, item, sep))
        out.push_back(item);
    if(!text.empty() && text.back() == sep)
        out.emplace_back();
    return out;
}

/// "mu=1,beta=2" (or positional "1,2") against the expected key list.
std::map<std::string, double> parseKeyValues(const std::string& text, const std::vector<std::string>& keys,
    const std::string& flag)
{
    std::map<std::string, double> out;
    const auto parts = split(text, ',');
    for(std::size_t i = 0; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        std::string key;
        std::string value;
        if(eq == std::string::npos) {
            if(i >= keys.size())
                throw InputError(flag + ": too many values in '" + text + "'");
            key = keys[i];
            value = parts[i];
        } else {
            key = parts[i].substr(0, eq);
            value = parts[i].substr(eq + 1);
        }
        if(std::find(keys.begin(), keys.end(), key) == keys.end())
            throw InputError(flag + ": unknown key '" + key + "'");
        if(out.count(key))
            throw InputError(flag + ": duplicate key '" + key + "'");
        out[key] = parseDouble(value, flag + " " + key);
    }
    return out;
}

double require(const std::map<std::string, double>& kv, const std::string& key, const std::string& flag)
{
    const auto it = kv.find(key);
    if(it == kv.end())
        throw InputError(flag + ": missing '" + key + "='");
    return it->second;
}

std::vector<double> parseGrid(const std::string& text, const std::string& flag)
{
    const auto parts = split(text, ':');
    if(parts.size() != 3)
        throw InputError(flag + " expects lo:hi:n, got '" + text + "'");
    const double lo = parseDouble(parts[0], flag + " lo");
    const double hi = parseDouble(parts[1], flag + " hi");
    const long n = parseLong(parts[2], flag + " n");
    if(n < 1)
        throw InputError(flag + ": n must be at least 1");
    std::vector<double> grid(static_cast<std::size_t>(n));
    for(long i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    if(n > 1)
        grid.back() = hi;
    return grid;
}

/// Option values after merging the JSON config file with command-line flags.
class Settings {
public:
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::optional<std::string> text(const std::string& key) const
    {
        const auto it = values_.find(key);
        if(it == values_.end())
            return std::nullopt;
        return it->second;
    }

    std::optional<double> real(const std::string& key) const
    {
        const auto t = text(key);
        if(!t)
            return std::nullopt;
        return parseDouble(*t, "--" + key);
    }

    std::optional<long> integer(const std::string& key) const
    {
        const auto t = text(key);
        if(!t)
            return std::nullopt;
        return parseLong(*t, "--" + key);
    }

    bool flag(const std::string& key) const
    {
        const auto t = text(key);
        return t && (*t == "true" || *t == "1");
    }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

private:
    std::map<std::string, std::string> values_;
};

const std::vector<std::string> kValueOptions = {
    "latin", "kepler", "harmonic", "henon", "bounded", "hollowed", "plummer", "gauge",
    "xi", "lambda", "xi-grid", "lambda-grid", "samples", "periods", "format", "tol", "output"};

const std::map<std::string, std::string> kOptionHelp = {
    {"latin", "parabola parameters a,b,c,d,e"},
    {"kepler", "Kepler potential: mu=..."},
    {"harmonic", "harmonic potential: omega=..."},
    {"henon", "Henon potential: mu=...,beta=..."},
    {"bounded", "bounded potential: mu=...,beta=..."},
    {"hollowed", "hollowed potential: mu=...,beta=..."},
    {"plummer", "Plummer potential b=...[,mu=...], a non-isochrone control (verify only)"},
    {"gauge", "gauge transformation eps=...,lam=... applied to the parameters"},
    {"xi", "orbit energy"},
    {"lambda", "orbit angular momentum"},
    {"xi-grid", "energy grid lo:hi:n"},
    {"lambda-grid", "angular-momentum grid lo:hi:n"},
    {"samples", "number of trajectory samples"},
    {"periods", "number of radial periods to sample"},
    {"format", "output format: text, csv or json"},
    {"tol", "quadrature and ODE tolerance for verify"},
    {"output", "write output to this file instead of stdout"},
};

void mergeConfigFile(const std::string& path, Settings& settings)
{
    std::ifstream in(path);
    if(!in)
        throw InputError("cannot open config file '" + path + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch(const json::parse_error& e) {
        throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if(!cfg.is_object())
        throw InputError("config file must hold a JSON object");
    for(const auto& [key, value] : cfg.items()) {
        const bool known = key == "bertrand" ||
            std::find(kValueOptions.begin(), kValueOptions.end(), key) != kValueOptions.end();
        if(!known)
            throw InputError("config file: unknown key '" + key + "'");
        if(settings.has(key))
            continue;  // flags win
        if(value.is_string())
            settings.set(key, value.get<std::string>());
        else if(value.is_boolean())
            settings.set(key, value.get<bool>() ? "true" : "false");
        else if(value.is_number_integer())
            settings.set(key, std::to_string(value.get<long>()));
        else if(value.is_number())
            settings.set(key, fmtShort(value.get<double>()));
        else if(value.is_array() && key == "latin") {
            std::string joined;
            for(const auto& v : value) {
                if(!v.is_number())
                    throw InputError("config file: latin entries must be numbers");
                joined += (joined.empty() ? "" : ",") + fmtShort(v.get<double>());
            }
            settings.set(key, joined);
        } else
            throw InputError("config file: unsupported value for '" + key + "'");
    }
}

// ---------------------------------------------------------------------------------------------
// potential specification

struct PotentialSpec {
    bool plummer = false;
    ParabolaParams params;
    std::string family;                   ///< named family or "latin"
    std::map<std::string, double> greek;  ///< parameters as given
    double plummer_mu = 1, plummer_b = 1;
};

PotentialSpec resolvePotential(const Settings& s)
{
    const std::vector<std::string> forms = {"latin", "kepler", "harmonic", "henon", "bounded", "hollowed", "plummer"};
    std::vector<std::string> given;
    for(const auto& f : forms)
        if(s.has(f))
            given.push_back(f);
    if(given.empty())
        throw InputError("no potential given; use one of --latin, --kepler, --harmonic, --henon, --bounded, --hollowed");
    if(given.size() > 1)
        throw InputError("exactly one potential form is allowed, got --" + given[0] + " and --" + given[1]);

    PotentialSpec spec;
    spec.family = given[0];
    const std::string flag = "--" + spec.family;
    const std::string text = *s.text(spec.family);
    if(spec.family == "latin") {
        const auto parts = split(text, ',');
        if(parts.size() != 5)
            throw InputError("--latin expects five comma-separated numbers a,b,c,d,e");
        spec.params = {parseDouble(parts[0], "a"), parseDouble(parts[1], "b"), parseDouble(parts[2], "c"),
            parseDouble(parts[3], "d"), parseDouble(parts[4], "e")};
    } else if(spec.family == "kepler") {
        spec.greek = parseKeyValues(text, {"mu"}, flag);
        spec.params = potential::fromKepler(require(spec.greek, "mu", flag));
    } else if(spec.family == "harmonic") {
        spec.greek = parseKeyValues(text, {"omega"}, flag);
        spec.params = potential::fromHarmonic(require(spec.greek, "omega", flag));
    } else if(spec.family == "plummer") {
        spec.greek = parseKeyValues(text, {"b", "mu"}, flag);
        spec.plummer = true;
        spec.plummer_b = require(spec.greek, "b", flag);
        spec.plummer_mu = spec.greek.count("mu") ? spec.greek.at("mu") : 1.0;
        if(!(spec.plummer_b > 0) || !(spec.plummer_mu > 0))
            throw Error(ErrorKind::InvalidParams, "Plummer sphere needs mu > 0 and b > 0");
    } else {
        spec.greek = parseKeyValues(text, {"mu", "beta"}, flag);
        const double mu = require(spec.greek, "mu", flag), beta = require(spec.greek, "beta", flag);
        if(spec.family == "henon")
            spec.params = potential::fromHenon(mu, beta);
        else if(spec.family == "bounded")
            spec.params = potential::fromBounded(mu, beta);
        else
            spec.params = potential::fromHollowed(mu, beta);
    }
    if(s.has("gauge")) {
        if(spec.plummer)
            throw InputError("--gauge applies to parabola potentials only");
        const auto g = parseKeyValues(*s.text("gauge"), {"eps", "lam"}, "--gauge");
        const double eps = g.count("eps") ? g.at("eps") : 0.0, lam = g.count("lam") ? g.at("lam") : 0.0;
        spec.params = potential::applyGauge(spec.params, {eps, lam});
    }
    if(!spec.plummer)
        potential::validate(spec.params);
    return spec;
}

/// Greek parameters recognised from the canonical Latin tuples.
std::vector<std::pair<std::string, double>> greekOf(const ParabolaParams& p)
{
    if(p.b == 0 && p.c == 0 && p.e == 0 && p.d == -4)
        return {{"omega", -2 * p.a}};
    if(p.a != 0)
        return {};
    if(p.b == 1 && p.c < 0 && p.d == 0 && p.e == 0)
        return {{"mu", std::sqrt(-p.c / 2)}};
    if(p.b == 1 && p.c < 0 && p.d < 0 && p.e == 0) {
        const double mu = std::sqrt(-p.c / 2);
        return {{"mu", mu}, {"beta", -p.d / (4 * mu)}};
    }
    if(p.b == -1 && p.c > 0 && p.d < 0 && p.e == 0) {
        const double mu = std::sqrt(p.c / 2);
        return {{"mu", mu}, {"beta", -p.d / (4 * mu)}};
    }
    if(p.b == 1 && p.c < 0 && p.d == 0 && p.e > 0) {
        const double mu = std::sqrt(-p.c / 2);
        return {{"mu", mu}, {"beta", std::sqrt(p.e) / (2 * mu)}};
    }
    return {};
}

std::string classLabel(const potential::PotentialClass& cls)
{
    std::string label(potential::toString(cls.kind));
    if(cls.kepler_degenerate)
        label += " (Kepler degenerate)";
    return label;
}

json potentialJson(const PotentialSpec& spec)
{
    json j;
    if(spec.plummer) {
        j["family"] = "plummer";
        j["mu"] = spec.plummer_mu;
        j["b"] = spec.plummer_b;
        return j;
    }
    const auto& p = spec.params;
    const auto cls = potential::classify(p);
    j["family"] = spec.family;
    j["class"] = potential::toString(cls.kind);
    j["kepler_degenerate"] = cls.kepler_degenerate;
    j["latin"] = {p.a, p.b, p.c, p.d, p.e};
    return j;
}

// ---------------------------------------------------------------------------------------------
// output helpers

std::string formatOf(const Settings& s, const std::string& fallback, std::initializer_list<const char*> allowed)
{
    const std::string f = s.text("format").value_or(fallback);
    for(const char* a : allowed)
        if(f == a)
            return f;
    throw InputError("unsupported --format '" + f + "'");
}

void writeCsvRow(std::ostream& out, const std::vector<std::string>& cells)
{
    for(std::size_t i = 0; i < cells.size(); ++i)
        out << (i ? "," : "") << cells[i];
    out << '\n';
}

std::vector<double> gridFor(const Settings& s, const std::string& single, const std::string& grid,
    std::optional<std::vector<double>> fallback)
{
    if(s.has(single) && s.has(grid))
        throw InputError("give either --" + single + " or --" + grid + ", not both");
    if(s.has(grid))
        return parseGrid(*s.text(grid), "--" + grid);
    if(s.has(single))
        return {*s.real(single)};
    if(fallback)
        return *fallback;
    throw InputError("missing --" + single + " (or --" + grid + ")");
}

int exitCodeFor(ErrorKind kind)
{
    switch(kind) {
        case ErrorKind::InvalidParams:
        case ErrorKind::OutOfDomain:
        case ErrorKind::SingularPoint:
            return kInvalidInput;
        case ErrorKind::NoBoundOrbit:
        case ErrorKind::UnboundOrbit:
        case ErrorKind::NoCircularOrbit:
            return kNoBoundOrbit;
        default:
            return kVerificationFailed;
    }
}

// ---------------------------------------------------------------------------------------------
// classify

int cmdClassify(const Settings& s, std::ostream& out)
{
    const std::string format = formatOf(s, "text", {"text", "json", "csv"});
    const PotentialSpec spec = resolvePotential(s);
    if(spec.plummer)
        throw InputError("classify needs a parabola potential");
    const auto& p = spec.params;
    const auto cls = potential::classify(p);
    const auto dom = potential::domain(p);
    const double xv = p.b == 0 ? std::nan("") : potential::vertexAbscissa(p);
    const auto greek = greekOf(p);

    if(format == "json") {
        json j = potentialJson(spec);
        j["delta"] = p.discriminant();
        j["x_v"] = number(xv);
        j["domain"] = {number(dom.lo), number(dom.hi)};
        json g = json::object();
        for(const auto& [k, v] : greek)
            g[k] = v;
        j["greek"] = g;
        out << j.dump(2) << '\n';
    } else if(format == "csv") {
        writeCsvRow(out, {"class", "kepler_degenerate", "delta", "x_v", "a", "b", "c", "d", "e", "domain_lo", "domain_hi"});
        writeCsvRow(out, {std::string(potential::toString(cls.kind)), cls.kepler_degenerate ? "true" : "false",
            fmt17(p.discriminant()), fmt17(xv), fmt17(p.a), fmt17(p.b), fmt17(p.c), fmt17(p.d), fmt17(p.e),
            fmt17(dom.lo), fmt17(dom.hi)});
    } else {
        out << classLabel(cls) << ", delta=" << fmtShort(p.discriminant());
        if(p.b != 0)
            out << ", x_v=" << fmtShort(xv);
        out << '\n';
        out << classLabel(cls) << ", latin=" << fmtLatin(p) << '\n';
        out << "domain=[" << fmtShort(dom.lo) << ", " << fmtShort(dom.hi) << (dom.isBounded() ? "]" : ")") << '\n';
        if(!greek.empty()) {
            out << "greek=";
            for(std::size_t i = 0; i < greek.size(); ++i)
                out << (i ? "," : "") << greek[i].first << "=" << fmtShort(greek[i].second);
            out << '\n';
        }
    }
    return kOk;
}

// ---------------------------------------------------------------------------------------------
// elements

int cmdElements(const Settings& s, std::ostream& out)
{
    const std::string format = formatOf(s, "csv", {"csv", "json"});
    const PotentialSpec spec = resolvePotential(s);
    if(spec.plummer)
        throw InputError("elements needs a parabola potential");
    const auto xis = gridFor(s, "xi", "xi-grid", std::nullopt);
    const auto lams = gridFor(s, "lambda", "lambda-grid", std::nullopt);

    const std::vector<std::string> header = {"xi", "lambda", "T", "Theta", "J", "Omega", "ecc", "alpha", "x_p", "x_a", "error"};
    json rows = json::array();
    if(format == "csv")
        writeCsvRow(out, header);
    bool anyOk = false;
    int worst = kOk;
    for(double xi : xis) {
        for(double lam : lams) {
            try {
                const auto el = analytic::orbitElements(spec.params, {xi, lam});
                const double alpha = std::sqrt(std::fabs(el.alpha2));
                anyOk = true;
                if(format == "csv") {
                    writeCsvRow(out, {fmt17(xi), fmt17(lam), fmt17(el.T), fmt17(el.Theta), fmt17(el.J),
                        fmt17(el.omega_r), fmt17(el.ecc), fmt17(alpha), fmt17(el.x_p), fmt17(el.x_a), ""});
                } else {
                    rows.push_back({{"xi", xi}, {"lambda", lam}, {"T", el.T}, {"Theta", el.Theta}, {"J", el.J},
                        {"Omega", el.omega_r}, {"ecc", el.ecc}, {"alpha", alpha}, {"x_p", el.x_p}, {"x_a", el.x_a}});
                }
            } catch(const Error& e) {
                spdlog::debug("elements: xi={} lambda={} failed: {}", xi, lam, e.what());
                worst = std::max(worst, exitCodeFor(e.kind()) == kNoBoundOrbit ? int(kNoBoundOrbit) : int(kInvalidInput));
                if(format == "csv") {
                    std::vector<std::string> cells = {fmt17(xi), fmt17(lam)};
                    cells.resize(header.size() - 1);
                    std::string msg = e.what();
                    std::replace(msg.begin(), msg.end(), ',', ';');
                    cells.push_back(msg);
                    writeCsvRow(out, cells);
                } else {
                    rows.push_back({{"xi", xi}, {"lambda", lam}, {"error", e.what()}});
                }
            }
        }
    }
    if(format == "json") {
        json j;
        j["potential"] = potentialJson(spec);
        j["rows"] = rows;
        out << j.dump(2) << '\n';
    }
    return anyOk ? kOk : worst;
}

// ---------------------------------------------------------------------------------------------
// orbit

int cmdOrbit(const Settings& s, std::ostream& out)
{
    const std::string format = formatOf(s, "csv", {"csv", "json"});
    const PotentialSpec spec = resolvePotential(s);
    if(spec.plummer)
        throw InputError("orbit needs a parabola potential");
    if(!s.has("xi") || !s.has("lambda"))
        throw InputError("orbit needs --xi and --lambda");
    const analytic::OrbitConstants oc{*s.real("xi"), *s.real("lambda")};
    const long n = s.integer("samples").value_or(101);
    const double periods = s.real("periods").value_or(1.0);
    if(n < 1)
        throw InputError("--samples must be at least 1");
    if(!(periods > 0) || !std::isfinite(periods))
        throw InputError("--periods must be positive");

    const auto el = analytic::orbitElements(spec.params, oc);
    std::vector<double> times(static_cast<std::size_t>(n));
    for(long i = 0; i < n; ++i)
        times[static_cast<std::size_t>(i)] = n == 1 ? 0.0 : periods * el.T * static_cast<double>(i) / static_cast<double>(n - 1);
    if(n > 1)
        times.back() = periods * el.T;
    const auto samples = analytic::trajectory(spec.params, oc, times);
    spdlog::debug("orbit: {} samples over {} radial periods", n, periods);

    if(format == "csv") {
        writeCsvRow(out, {"t", "E", "x", "r", "theta", "zJ", "zLambda"});
        for(const auto& smp : samples)
            writeCsvRow(out, {fmt17(smp.t), fmt17(smp.E), fmt17(smp.x), fmt17(smp.r), fmt17(smp.theta),
                fmt17(smp.zJ), fmt17(smp.zLambda)});
        return kOk;
    }
    json j;
    j["potential"] = potentialJson(spec);
    j["xi"] = oc.xi;
    j["lambda"] = oc.lam;
    j["elements"] = {{"Omega", el.omega_r}, {"ecc", el.ecc}, {"alpha2", el.alpha2}, {"x_v", number(el.x_v)},
        {"zeta2", number(el.zeta2)}, {"T", el.T}, {"Theta", el.Theta}, {"J", el.J}, {"x_p", el.x_p}, {"x_a", el.x_a}};
    json arr = json::array();
    for(const auto& smp : samples)
        arr.push_back({{"t", smp.t}, {"E", smp.E}, {"x", smp.x}, {"r", smp.r}, {"theta", smp.theta},
            {"zJ", smp.zJ}, {"zLambda", smp.zLambda}});
    j["samples"] = arr;
    out << j.dump(2) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------------------------
// verify

struct Check {
    std::string name;
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    std::optional<double> value;
    std::string error;
};

class Checks {
public:
    /// Runs fn (returning the residual) and records the outcome against tol.
    template<typename F>
    void add(const std::string& name, double tol, F fn)
    {
        Check c;
        c.name = name;
        c.tolerance = tol;
        try {
            c.residual = fn(c);
            c.pass = c.residual <= tol;
        } catch(const std::exception& e) {
            c.residual = std::numeric_limits<double>::quiet_NaN();
            c.pass = false;
            c.error = e.what();
        }
        spdlog::info("check {}: residual {} tol {} {}", name, c.residual, tol, c.pass ? "pass" : "FAIL");
        list.push_back(std::move(c));
    }

    bool allPass() const
    {
        return std::all_of(list.begin(), list.end(), [](const Check& c) { return c.pass; });
    }

    std::vector<Check> list;
};

double rel(double a, double b)
{
    return std::fabs(a - b) / std::max(std::fabs(b), std::numeric_limits<double>::min());
}

struct Tolerances {
    double quad = oracle::kDefaultQuadTol;
    double ode = oracle::kDefaultOdeRelTol;
};

/// A bound orbit for the default checks: Lambda given or 1, radial action 0.3 Lambda, halved
/// until the orbit stays inside the domain.
analytic::OrbitConstants defaultOrbit(const Settings& s, const ParabolaParams& p)
{
    const double lam = s.real("lambda").value_or(1.0);
    if(s.has("xi"))
        return {*s.real("xi"), lam};
    double J = 0.3 * lam;
    for(int i = 0; i < 60; ++i, J /= 2) {
        try {
            const analytic::OrbitConstants oc{analytic::hamiltonian(p, J, lam), lam};
            analytic::orbitElements(p, oc);
            return oc;
        } catch(const Error& e) {
            if(exitCodeFor(e.kind()) != kNoBoundOrbit)
                throw;
            spdlog::debug("default orbit: J = {} not admissible ({})", J, e.what());
        }
    }
    throw Error(ErrorKind::NoBoundOrbit, "no bound orbit found for the default angular momentum");
}

void verifyParabola(const Settings& s, const PotentialSpec& spec, const Tolerances& tol, Checks& checks, json& meta)
{
    const ParabolaParams& p = spec.params;
    const analytic::OrbitConstants oc = defaultOrbit(s, p);
    const auto el = analytic::orbitElements(p, oc);  // throws NoBoundOrbit before any check runs
    const auto pot = oracle::RadialPotential::fromParabola(p);
    meta["xi"] = oc.xi;
    meta["lambda"] = oc.lam;

    std::vector<double> lamGrid;
    if(s.has("lambda-grid"))
        lamGrid = parseGrid(*s.text("lambda-grid"), "--lambda-grid");
    else
        for(double f : {0.5, 0.75, 1.0, 1.25, 1.5})
            lamGrid.push_back(f * oc.lam);

    checks.add("parabola_ode_residual", 1e-10, [&](Check&) {
        const auto dom = potential::domain(p);
        double worst = 0;
        for(int i = 0; i < 20; ++i) {
            const double t = (i + 0.5) / 20.0;
            // uniform on a bounded domain, log-spaced over three decades otherwise
            const double x = dom.isBounded() ? dom.lo + (dom.hi - dom.lo) * t
                                             : std::max(dom.lo, 1e-2) * 2 * std::pow(1e3, t);
            if(!dom.containsInterior(x))
                continue;
            const auto der = potential::yAll(p, x);
            const double scale = std::max(std::fabs(3 * der.d2 * der.d4), 5 * der.d3 * der.d3);
            if(scale > 0)
                worst = std::max(worst, std::fabs(potential::parabolaOdeResidual(p, x)) / scale);
        }
        return worst;
    });
    checks.add("radial_period_vs_quadrature", 1e-8, [&](Check& c) {
        c.value = el.T;
        return rel(oracle::quadRadialPeriod(pot, oc, tol.quad).value, el.T);
    });
    checks.add("apsidal_angle_vs_quadrature", 1e-8, [&](Check& c) {
        c.value = el.Theta;
        return rel(oracle::quadApsidalAngle(pot, oc, tol.quad).value, el.Theta);
    });
    checks.add("radial_action_vs_quadrature", 1e-8, [&](Check& c) {
        c.value = el.J;
        return std::fabs(oracle::quadRadialAction(pot, oc, tol.quad).value - el.J) / std::max(el.J, 1e-2 * oc.lam);
    });
    checks.add("trajectory_vs_ode", 1e-6, [&](Check&) {
        std::vector<double> times(201);
        for(std::size_t i = 0; i < times.size(); ++i)
            times[i] = el.T * static_cast<double>(i) / 200.0;
        const auto ode = oracle::integrateOrbit(pot, oc, times, tol.ode);
        const auto ana = analytic::trajectory(p, oc, times);
        double worst = 0;
        for(std::size_t i = 0; i < times.size(); ++i) {
            worst = std::max(worst, std::fabs(ode[i].r - ana[i].r) / el.rApo());
            worst = std::max(worst, std::fabs(ode[i].theta - ana[i].theta) / el.Theta);
        }
        return worst;
    });
    checks.add("isochrony_spread", 1e-8, [&](Check&) {
        const auto grid = oracle::admissibleLambdaGrid(pot, oc.xi, 10);
        return oracle::isochronySpread(pot, oc.xi, grid, tol.quad);
    });
    checks.add("identity_omega_T", 1e-10, [&](Check&) { return rel(el.omega_r * el.T, 2 * pi); });
    if(p.b != 0) {
        checks.add("identity_third_law_alpha", 1e-10, [&](Check&) {
            const double alpha3 = std::pow(std::fabs(el.alpha2), 1.5);
            const double target = std::sqrt(p.discriminant() / (2 * std::pow(std::fabs(p.b), 3)));
            return rel(el.omega_r * el.omega_r * alpha3, target);
        });
    }
    checks.add("identity_frequency_ratio", 1e-10, [&](Check&) {
        const auto w = analytic::frequencies(p, el.J, oc.lam);
        return rel(w.omega_Lambda / w.omega_J, el.Theta / (2 * pi));
    });
    checks.add("identity_half_angle", 1e-10, [&](Check&) {
        return rel(analytic::angleOfE(p, oc, el, pi), el.Theta / 2);
    });
    if(p.b != 0 && el.x_v > 0) {
        checks.add("complex_branch_imaginary", 1e-12, [&](Check&) {
            double worst = 0;
            for(int i = 1; i < 64; ++i) {
                const auto a = analytic::angleOfEDetailed(p, oc, el, pi * i / 64.0);
                worst = std::max(worst, a.imag_residual / std::max(std::fabs(a.theta), 1e-300));
            }
            return worst;
        });
    }

    std::vector<birkhoff::BirkhoffInvariants> fromPot, fromPer;
    checks.add("birkhoff_route_l", 1e-10, [&](Check&) {
        double worst = 0;
        for(double lam : lamGrid) {
            fromPot.push_back(birkhoff::invariantsFromPotential(p, lam));
            fromPer.push_back(birkhoff::invariantsFromPeriod(p, lam));
            worst = std::max(worst, std::fabs(fromPot.back().l - fromPer.back().l));
        }
        return worst;
    });
    checks.add("birkhoff_route_b", 1e-10, [&](Check&) {
        if(fromPot.size() != lamGrid.size())
            throw Error(ErrorKind::NoCircularOrbit, "invariants unavailable on the grid");
        double worst = 0;
        for(std::size_t i = 0; i < fromPot.size(); ++i)
            worst = std::max(worst, rel(fromPot[i].b_inv, fromPer[i].b_inv));
        return worst;
    });
    checks.add("birkhoff_route_B", 1e-6, [&](Check&) {
        if(fromPot.size() != lamGrid.size())
            throw Error(ErrorKind::NoCircularOrbit, "invariants unavailable on the grid");
        double worst = 0;
        for(std::size_t i = 0; i < fromPot.size(); ++i)
            worst = std::max(worst, std::fabs(fromPot[i].B_inv - fromPer[i].B_inv) / std::max(1.0, std::fabs(fromPer[i].B_inv)));
        return worst;
    });
    birkhoff::TheoremReport theorem;
    checks.add("theorem_birkhoff_ode", 1e-6, [&](Check&) {
        theorem = birkhoff::isochroneTheoremCheck(p, lamGrid);
        return theorem.max_birkhoff_ode;
    });
    checks.add("theorem_parabola_ode", 1e-10, [&](Check&) {
        if(theorem.rows.empty())
            throw Error(ErrorKind::NoCircularOrbit, "theorem check unavailable on the grid");
        return theorem.max_parabola_ode;
    });
    checks.add("third_law", 1e-10, [&](Check&) {
        double worst = 0;
        for(double lam : lamGrid) {
            const double xi = analytic::circularEnergy(p, lam);
            worst = std::max(worst, rel(birkhoff::thirdLaw(p, xi), analytic::radialPeriod(p, xi)));
        }
        return worst;
    });
    checks.add("frequency_invariant_J", 1e-6, [&](Check& c) {
        const auto inv = birkhoff::frequencyInvariants(p, el.J, oc.lam);
        c.value = inv.J_inv;
        return std::fabs(inv.J_inv);
    });
    if(s.flag("bertrand")) {
        checks.add("bertrand_consistency", 0.5, [&](Check& c) {
            const auto b = birkhoff::bertrandCheck(p, lamGrid);
            const auto inv = birkhoff::frequencyInvariants(p, el.J, oc.lam);
            const bool constantQ = b.residual <= 1e-6;
            const bool flat = std::fabs(inv.T_inv) <= 1e-6 && std::fabs(inv.G_inv) <= 1e-6;
            c.value = b.q_fit;
            meta["bertrand"] = {{"q_fit", b.q_fit}, {"q_residual", b.residual}, {"T_inv", inv.T_inv},
                {"G_inv", inv.G_inv}, {"is_bertrand", constantQ}};
            // constant Q and vanishing torsion must agree
            return constantQ == flat ? 0.0 : 1.0;
        });
    }
}

void verifyGeneric(const Settings& s, const PotentialSpec& spec, const Tolerances& tol, Checks& checks, json& meta)
{
    const auto pot = oracle::RadialPotential::plummer(spec.plummer_mu, spec.plummer_b);
    const auto curve = potential::plummerCurve(spec.plummer_mu, spec.plummer_b);
    const double xi = s.real("xi").value_or(-0.4 * spec.plummer_mu / spec.plummer_b);
    meta["xi"] = xi;
    const auto grid = s.has("lambda-grid") ? parseGrid(*s.text("lambda-grid"), "--lambda-grid")
                                           : oracle::admissibleLambdaGrid(pot, xi, 5);

    checks.add("isochrony_spread", 1e-8, [&](Check&) {
        return oracle::isochronySpread(pot, xi, oracle::admissibleLambdaGrid(pot, xi, 10), tol.quad);
    });
    birkhoff::TheoremReport theorem;
    checks.add("theorem_birkhoff_ode", 1e-6, [&](Check&) {
        theorem = birkhoff::isochroneTheoremCheck(*curve, grid);
        return theorem.max_birkhoff_ode;
    });
    checks.add("theorem_parabola_ode", 1e-10, [&](Check&) {
        if(theorem.rows.empty())
            throw Error(ErrorKind::NoCircularOrbit, "theorem check unavailable on the grid");
        return theorem.max_parabola_ode;
    });
    if(s.flag("bertrand")) {
        checks.add("bertrand_constant_q", 1e-6, [&](Check& c) {
            const auto b = birkhoff::bertrandCheck(*curve, grid);
            c.value = b.q_fit;
            meta["bertrand"] = {{"q_fit", b.q_fit}, {"q_residual", b.residual}};
            return b.residual;
        });
    }
}

int cmdVerify(const Settings& s, std::ostream& out)
{
    const std::string format = formatOf(s, "json", {"json", "csv"});
    const PotentialSpec spec = resolvePotential(s);
    Tolerances tol;
    if(const auto t = s.real("tol")) {
        if(!(*t > 0) || !(*t < 1e-2))
            throw InputError("--tol must lie in (0, 1e-2)");
        tol.quad = *t;
        tol.ode = *t;
    }
    Checks checks;
    json meta = json::object();
    if(spec.plummer)
        verifyGeneric(s, spec, tol, checks, meta);
    else
        verifyParabola(s, spec, tol, checks, meta);

    const bool pass = checks.allPass();
    if(format == "csv") {
        writeCsvRow(out, {"name", "residual", "tolerance", "pass"});
        for(const auto& c : checks.list)
            writeCsvRow(out, {c.name, fmt17(c.residual), fmt17(c.tolerance), c.pass ? "true" : "false"});
    } else {
        json j;
        j["potential"] = potentialJson(spec);
        j["orbit"] = meta;
        json arr = json::array();
        for(const auto& c : checks.list) {
            json row = {{"name", c.name}, {"residual", number(c.residual)}, {"tolerance", c.tolerance}, {"pass", c.pass}};
            if(c.value)
                row["value"] = number(*c.value);
            if(!c.error.empty())
                row["error"] = c.error;
            arr.push_back(row);
        }
        j["checks"] = arr;
        j["pass"] = pass;
        out << j.dump(2) << '\n';
    }
    return pass ? kOk : kVerificationFailed;
}

// ---------------------------------------------------------------------------------------------
// table

int cmdTable(const Settings& s, std::ostream& out)
{
    const std::string format = formatOf(s, "csv", {"csv", "json"});
    const PotentialSpec spec = resolvePotential(s);
    if(spec.plummer)
        throw InputError("table needs a parabola potential");
    const auto lams = gridFor(s, "lambda", "lambda-grid", parseGrid("0.5:1.5:5", "--lambda-grid"));
    const std::vector<std::string> header = {"lambda", "x_c", "l_potential", "b_potential", "B_potential",
        "l_period", "b_period", "B_period"};
    json rows = json::array();
    if(format == "csv")
        writeCsvRow(out, header);
    for(double lam : lams) {
        const double xc = birkhoff::circularAbscissa(spec.params, lam);
        const auto a = birkhoff::invariantsFromPotential(spec.params, lam);
        const auto b = birkhoff::invariantsFromPeriod(spec.params, lam);
        if(format == "csv")
            writeCsvRow(out, {fmt17(lam), fmt17(xc), fmt17(a.l), fmt17(a.b_inv), fmt17(a.B_inv), fmt17(b.l),
                fmt17(b.b_inv), fmt17(b.B_inv)});
        else
            rows.push_back({{"lambda", lam}, {"x_c", xc}, {"l_potential", a.l}, {"b_potential", a.b_inv},
                {"B_potential", a.B_inv}, {"l_period", b.l}, {"b_period", b.b_inv}, {"B_period", b.B_inv}});
    }
    if(format == "json") {
        json j;
        j["potential"] = potentialJson(spec);
        j["rows"] = rows;
        out << j.dump(2) << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------------------------

void configureLogging()
{
    static const bool once = [] {
        auto logger = spdlog::stderr_logger_mt("isochrone");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)once;
    const char* env = std::getenv("ISOCHRONE_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    configureLogging();

    CLI::App app{"Isochrone potentials: classification, closed-form orbits and verification", "isochrone"};
    app.require_subcommand(1);
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    bool bertrand = false;
    std::string configPath;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"classify", "Classify a potential and print its parabola data"},
        {"elements", "Orbit elements over a grid of (xi, Lambda)"},
        {"orbit", "Sample the closed-form trajectory of one orbit"},
        {"verify", "Cross-check the closed forms against quadrature, ODE and Birkhoff identities"},
        {"table", "Birkhoff invariants from both routes over a Lambda grid"},
    };
    for(const Sub& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        for(const auto& key : kValueOptions) {
            const std::string flagName = key == "output" ? "-o,--output" : "--" + key;
            CLI::Option* opt = cmd->add_option(flagName, raw[std::string(sub.name) + "/" + key], kOptionHelp.at(key));
            opts[std::string(sub.name) + "/" + key] = opt;
        }
        cmd->add_flag("--bertrand", bertrand, "also fit the Bertrand constant Q (verify)");
        cmd->add_option("--config", configPath, "JSON config file; flags override its entries");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch(const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch(const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch(const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    try {
        Settings settings;
        for(const auto& key : kValueOptions) {
            const std::string id = name + "/" + key;
            if(opts[id]->count() > 0)
                settings.set(key, raw[id]);
        }
        if(bertrand)
            settings.set("bertrand", "true");
        if(!configPath.empty())
            mergeConfigFile(configPath, settings);

        std::ofstream file;
        std::ostream* sink = &out;
        if(const auto path = settings.text("output")) {
            file.open(*path, std::ios::binary);
            if(!file)
                throw InputError("cannot write to '" + *path + "'");
            sink = &file;
        }
        spdlog::debug("running {}", name);
        if(name == "classify")
            return cmdClassify(settings, *sink);
        if(name == "elements")
            return cmdElements(settings, *sink);
        if(name == "orbit")
            return cmdOrbit(settings, *sink);
        if(name == "verify")
            return cmdVerify(settings, *sink);
        return cmdTable(settings, *sink);
    } catch(const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch(const Error& e) {
        err << "error: " << e.what() << '\n';
        return exitCodeFor(e.kind());
    }
}

}  // namespace isochrone::cli
