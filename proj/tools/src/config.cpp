#include "config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <cmath>
#include <limits>
#include <numbers>

#include "autores/error.hpp"
#include "autores/format.hpp"
#include "autores/phase_model.hpp"
#include "autores/stability.hpp"

namespace autores::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string type_name(ValueType t) {
    switch (t) {
        case ValueType::Number: return "a number";
        case ValueType::Auto: return "a number or \"auto\"";
        case ValueType::Integer: return "an integer";
        case ValueType::Bool: return "a boolean";
        case ValueType::Choice: return "one of the listed choices";
        case ValueType::Range: return "a range lo:hi:step";
        case ValueType::NumberList: return "a list of numbers";
        case ValueType::Text: return "a string";
    }
    return "a value";
}

std::optional<double> parse_double(std::string_view s) {
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || std::isnan(v)) return std::nullopt;
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

// A string result is the diagnostic.
std::variant<Value, std::string> parse_text(const OptionSpec& spec, const std::string& raw) {
    const std::string s = trim(raw);
    switch (spec.type) {
        case ValueType::Number:
        case ValueType::Auto: {
            if (spec.type == ValueType::Auto && s == "auto") return Value{kNaN};
            if (auto v = parse_double(s)) return Value{*v};
            return "expected " + type_name(spec.type) + ", got '" + raw + "'";
        }
        case ValueType::Integer: {
            long long v = 0;
            auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
                return "expected an integer, got '" + raw + "'";
            return Value{v};
        }
        case ValueType::Bool: {
            if (s == "true" || s == "1" || s == "yes" || s == "on") return Value{true};
            if (s == "false" || s == "0" || s == "no" || s == "off") return Value{false};
            return "expected true or false, got '" + raw + "'";
        }
        case ValueType::Choice: {
            for (const auto& c : spec.choices)
                if (c == s) return Value{s};
            return "expected one of {" + join(spec.choices, ',') + "}, got '" + raw + "'";
        }
        case ValueType::Range: {
            const auto parts = split(s, ':');
            if (parts.size() != 3) return "expected a range lo:hi:step, got '" + raw + "'";
            Range r;
            auto lo = parse_double(trim(parts[0])), hi = parse_double(trim(parts[1])),
                 st = parse_double(trim(parts[2]));
            if (!lo || !hi || !st || !std::isfinite(*lo) || !std::isfinite(*hi) || !std::isfinite(*st))
                return "expected a range lo:hi:step of finite numbers, got '" + raw + "'";
            r.lo = *lo;
            r.hi = *hi;
            r.step = *st;
            if (!(r.step > 0.0) || r.hi < r.lo) return "range needs step > 0 and hi >= lo, got '" + raw + "'";
            if ((r.hi - r.lo) / r.step > 1e7) return "range has more than 1e7 points: '" + raw + "'";
            return Value{r};
        }
        case ValueType::NumberList: {
            std::vector<double> out;
            if (s.empty()) return Value{out};
            for (auto part : split(s, ',')) {
                auto v = parse_double(trim(part));
                if (!v) return "expected comma-separated numbers, got '" + raw + "'";
                out.push_back(*v);
            }
            return Value{out};
        }
        case ValueType::Text: return Value{s};
    }
    return std::string("unsupported option type");
}

std::variant<Value, std::string> parse_json(const OptionSpec& spec, const nlohmann::json& j) {
    const std::string got = std::string("got ") + j.type_name();
    switch (spec.type) {
        case ValueType::Number:
        case ValueType::Auto:
            if (j.is_number()) return Value{j.get<double>()};
            if (j.is_string()) return parse_text(spec, j.get<std::string>());
            return "expected " + type_name(spec.type) + ", " + got;
        case ValueType::Integer:
            if (j.is_number_integer()) return Value{j.get<long long>()};
            return "expected an integer, " + got;
        case ValueType::Bool:
            if (j.is_boolean()) return Value{j.get<bool>()};
            return "expected a boolean, " + got;
        case ValueType::Choice:
        case ValueType::Range:
        case ValueType::Text:
            if (j.is_string()) return parse_text(spec, j.get<std::string>());
            return "expected " + type_name(spec.type) + " as a string, " + got;
        case ValueType::NumberList: {
            if (!j.is_array()) return "expected an array of numbers, " + got;
            std::vector<double> out;
            for (const auto& e : j) {
                if (!e.is_number()) return std::string("expected an array of numbers, got an element of type ") +
                                           e.type_name();
                out.push_back(e.get<double>());
            }
            return Value{out};
        }
    }
    return std::string("unsupported option type");
}

std::string value_text(const Value& v) {
    struct V {
        std::string operator()(double d) const {
            if (std::isnan(d)) return "auto";
            if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
            return fmt17(d);
        }
        std::string operator()(long long i) const { return std::to_string(i); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const Range& r) const { return fmt17(r.lo) + ":" + fmt17(r.hi) + ":" + fmt17(r.step); }
        std::string operator()(const std::vector<double>& l) const {
            std::vector<std::string> parts;
            for (double d : l) parts.push_back(fmt17(d));
            return join(parts, ',');
        }
    };
    return std::visit(V{}, v);
}

nlohmann::ordered_json value_json(const Value& v) {
    struct V {
        nlohmann::ordered_json operator()(double d) const {
            if (!std::isfinite(d)) return value_text(Value{d});
            return d;
        }
        nlohmann::ordered_json operator()(long long i) const { return i; }
        nlohmann::ordered_json operator()(bool b) const { return b; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
        nlohmann::ordered_json operator()(const Range& r) const { return value_text(Value{r}); }
        nlohmann::ordered_json operator()(const std::vector<double>& l) const { return l; }
    };
    return std::visit(V{}, v);
}

// 1-based line of the first `"key"` after the first `"section"`.
int line_of(const std::string& text, const std::string& section, const std::string& key) {
    std::size_t from = 0;
    if (!section.empty()) {
        const auto s = text.find('"' + section + '"');
        if (s != std::string::npos) from = s + section.size() + 2;
    }
    auto pos = text.find('"' + key + '"', from);
    if (pos == std::string::npos) pos = from;
    int line = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

OptionSpec num(std::string key, std::string def, std::string help) {
    return {std::move(key), ValueType::Number, std::move(def), std::move(help), {}};
}
OptionSpec integer(std::string key, std::string def, std::string help) {
    return {std::move(key), ValueType::Integer, std::move(def), std::move(help), {}};
}

void add_common(std::vector<OptionSpec>& v, const std::string& format) {
    v.push_back({"io.out_dir", ValueType::Text, "", "output directory (empty: $AUTORES_OUT, else .)", {}});
    v.push_back({"io.format", ValueType::Choice, format, "output format", {"csv", "json"}});
    v.push_back(integer("threads", "0", "worker threads (0: hardware concurrency)"));
    v.push_back(integer("seed", "1", "random seed"));
}

void add_model(std::vector<OptionSpec>& v) {
    v.push_back(num("params.lambda", "1", "chirp rate lambda > 0"));
    v.push_back(num("params.nu", "0", "parametric phase shift nu in [0, pi)"));
    v.push_back(num("params.mu0", "0", "leading pump amplitude mu0 (delta = mu0 sqrt(lambda))"));
}

void add_profile(std::vector<OptionSpec>& v, const std::string& profile) {
    v.push_back({"params.mu_tail", ValueType::NumberList, "",
                 "further coefficients mu_1, mu_2, ... of mu = tau^(-1/2) (mu0 + mu_1/tau + ...)", {}});
    v.push_back({"params.profile", ValueType::Choice, profile,
                 "pump profile: asymptotic tau^(-1/2) series or regularized mu0 (shift + tau)^(-1/2)",
                 {"asymptotic", "regularized"}});
    v.push_back(num("params.shift", "1", "shift of the regularized profile"));
}

void add_solver(std::vector<OptionSpec>& v, const std::string& rtol, const std::string& atol) {
    v.push_back(num("solver.rtol", rtol, "relative tolerance"));
    v.push_back(num("solver.atol", atol, "absolute tolerance"));
    v.push_back(num("solver.h_init", "0.001", "initial step"));
    v.push_back(num("solver.h_max", "inf", "largest step"));
    v.push_back(num("solver.guard_rho_min", "1e-06", "amplitude guard"));
}

void add_root(std::vector<OptionSpec>& v, bool branch) {
    v.push_back(num("options.sigma", "0", "use the root of P nearest to this phase"));
    if (branch) v.push_back(integer("options.branch", "1", "series branch, +1 or -1 (multiple roots)"));
}

void positive(std::vector<OptionSpec>& v, const std::string& key) {
    for (auto& s : v)
        if (s.key == key) s.positive = true;
}

}  // namespace

std::vector<double> Range::expand() const {
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

std::string OptionSpec::flag() const {
    std::string name = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
    for (auto& c : name)
        if (c == '_') c = '-';
    return "--" + name;
}

std::string_view to_string(Subcommand s) noexcept {
    switch (s) {
        case Subcommand::Roots: return "roots";
        case Subcommand::Partition: return "partition";
        case Subcommand::Series: return "series";
        case Subcommand::Simulate: return "simulate";
        case Subcommand::CaptureMap: return "capture-map";
        case Subcommand::OscillatorDemo: return "oscillator-demo";
        case Subcommand::Stability: return "stability";
        case Subcommand::Portrait: return "portrait";
        case Subcommand::ActionAngle: return "action-angle";
        case Subcommand::Envelope: return "envelope";
    }
    return "?";
}

const std::vector<Subcommand>& all_subcommands() {
    static const std::vector<Subcommand> all{Subcommand::Roots,      Subcommand::Partition,      Subcommand::Series,
                                             Subcommand::Simulate,   Subcommand::CaptureMap,     Subcommand::OscillatorDemo,
                                             Subcommand::Stability,  Subcommand::Portrait,       Subcommand::ActionAngle,
                                             Subcommand::Envelope};
    return all;
}

std::string_view describe(Subcommand s) noexcept {
    switch (s) {
        case Subcommand::Roots: return "Roots of the phase equation with multiplicity and class";
        case Subcommand::Partition: return "Region and roots over a (delta, nu) grid";
        case Subcommand::Series: return "Asymptotic series of an autoresonant solution";
        case Subcommand::Simulate: return "Integrate the model system from one initial state";
        case Subcommand::CaptureMap: return "Capture verdicts over a grid of initial states";
        case Subcommand::OscillatorDemo: return "Integrate the fast chirped oscillator";
        case Subcommand::Stability: return "Monte Carlo stability measurement near a series solution";
        case Subcommand::Portrait: return "Level lines of the frozen Hamiltonian h_-1 and its critical points";
        case Subcommand::ActionAngle: return "Periods and frequencies of closed h_2^0 orbits (double roots)";
        case Subcommand::Envelope: return "Fit envelope and phase laws of a perturbed trajectory";
    }
    return "";
}

std::vector<OptionSpec> option_specs(Subcommand s) {
    std::vector<OptionSpec> v;
    switch (s) {
        case Subcommand::Roots:
            add_common(v, "json");
            add_model(v);
            v.push_back(num("options.root_tol", "1e-09", "root tolerance"));
            v.push_back(num("options.deriv_tol", "1e-06", "derivative tolerance for multiplicity"));
            break;
        case Subcommand::Partition:
            add_common(v, "csv");
            v.push_back(num("params.lambda", "1", "chirp rate lambda > 0"));
            v.push_back(integer("options.nu_steps", "64", "nu grid pi k / nu_steps, k < nu_steps"));
            v.push_back({"options.delta", ValueType::Range, "-1.5:1.5:0.01", "delta grid lo:hi:step", {}});
            v.push_back(num("options.boundary_tol", "1e-09", "|gamma| below this is a boundary"));
            break;
        case Subcommand::Series:
            add_common(v, "json");
            add_model(v);
            add_profile(v, "asymptotic");
            add_root(v, true);
            v.push_back(integer("options.orders", "6", "solved psi orders"));
            break;
        case Subcommand::Simulate:
            add_common(v, "csv");
            add_model(v);
            add_profile(v, "regularized");
            add_solver(v, "1e-09", "1e-11");
            v.push_back(num("options.rho0", "1", "initial rho"));
            v.push_back(num("options.psi0", "0", "initial psi"));
            v.push_back(num("options.tau0", "0", "initial tau"));
            v.push_back(num("options.tau_end", "100", "final tau"));
            v.push_back(num("options.capture_tol", "0.1", "|rho / sqrt(lambda tau) - 1| bound for capture"));
            v.push_back(num("options.winding_cap", "1", "psi windings (of 2 pi) for slipping"));
            break;
        case Subcommand::CaptureMap:
            add_common(v, "csv");
            add_model(v);
            add_profile(v, "regularized");
            add_solver(v, "1e-09", "1e-11");
            v.push_back(num("options.rho0_min", "0.05", "smallest initial rho"));
            v.push_back(num("options.rho0_max", "3", "largest initial rho"));
            v.push_back(integer("options.n_rho0", "40", "rho0 grid points (endpoints included)"));
            v.push_back(num("options.psi0_min", "0", "smallest initial psi"));
            v.push_back(num("options.psi0_max", fmt17(2.0 * std::numbers::pi), "psi0 upper end (excluded)"));
            v.push_back(integer("options.n_psi0", "40", "psi0 grid points"));
            v.push_back(num("options.tau0", "0", "initial tau"));
            v.push_back(num("options.horizon", "100", "final tau"));
            v.push_back(num("options.capture_tol", "0.1", "|rho / sqrt(lambda tau) - 1| bound for capture"));
            v.push_back(num("options.winding_cap", "1", "psi windings (of 2 pi) for slipping"));
            break;
        case Subcommand::OscillatorDemo:
            add_common(v, "csv");
            add_solver(v, "1e-09", "1e-11");
            v.push_back(num("options.epsilon", "0.01", "small parameter epsilon"));
            v.push_back(num("params.lambda", "1", "slow chirp rate lambda, sets vartheta"));
            v.push_back({"options.vartheta", ValueType::Auto, "auto", "chirp vartheta (auto: from lambda)", {}});
            v.push_back(num("options.x0", "0", "initial x"));
            v.push_back(num("options.v0", "0", "initial dx/dt"));
            v.push_back(num("options.t_end", "2000", "final t"));
            v.push_back(num("options.sample_dt", "0.05", "sampling interval in t"));
            break;
        case Subcommand::Stability:
            add_common(v, "json");
            add_model(v);
            add_profile(v, "asymptotic");
            add_solver(v, "1e-09", "1e-11");
            add_root(v, true);
            v.push_back({"options.mode", ValueType::Choice, "lyapunov", "measurement", {"lyapunov", "partial-rho"}});
            v.push_back({"options.radius", ValueType::Auto, "auto",
                         "starting radius (auto: 0.03, partial-rho: the epsilon-dependent radius)", {}});
            v.push_back(integer("options.samples", "20", "Monte Carlo samples"));
            v.push_back({"options.horizon", ValueType::Auto, "auto",
                         "final tau (auto: 1e4, partial-rho: tau0 eps^(-8/3) or tau0 eps^(-3))", {}});
            v.push_back(num("options.tau0", fmt17(stability::kDefaultTau0), "start of the asymptotic regime"));
            v.push_back(num("options.kappa", fmt17(stability::kDefaultKappa), "kappa in (0, 1)"));
            v.push_back(num("options.d_star", fmt17(stability::kDefaultDStar), "domain radius in scaled variables"));
            v.push_back(num("options.escape_norm", "0.1", "norm at which a growing sample escapes"));
            v.push_back(num("options.epsilon", "0.05", "amplitude bound (partial-rho)"));
            v.push_back(integer("options.orders", "6", "solved series orders"));
            v.push_back({"options.sensitivity", ValueType::Bool, "true", "rerun from 4 tau0", {}});
            break;
        case Subcommand::Portrait:
            add_common(v, "csv");
            add_model(v);
            add_root(v, false);
            v.push_back(num("options.r_min", "-2", "smallest R"));
            v.push_back(num("options.r_max", "2", "largest R"));
            v.push_back(integer("options.n_r", "201", "R grid points"));
            v.push_back(num("options.psi_min", fmt17(-std::numbers::pi), "smallest Psi"));
            v.push_back(num("options.psi_max", fmt17(std::numbers::pi), "largest Psi"));
            v.push_back(integer("options.n_psi", "201", "Psi grid points"));
            break;
        case Subcommand::ActionAngle:
            add_common(v, "csv");
            add_model(v);
            add_solver(v, "1e-12", "1e-14");
            add_root(v, false);
            v.push_back(integer("options.n_levels", "20", "levels I_star k / (n + 1)"));
            v.push_back({"options.levels", ValueType::NumberList, "", "explicit increasing levels (override n-levels)",
                         {}});
            break;
        case Subcommand::Envelope:
            add_common(v, "json");
            add_model(v);
            add_profile(v, "asymptotic");
            add_solver(v, "1e-09", "1e-11");
            add_root(v, true);
            v.push_back(integer("options.orders", "6", "solved series orders"));
            v.push_back(num("options.t0", "100", "start tau on the series solution"));
            v.push_back(num("options.tau_end", "10000", "final tau"));
            v.push_back(num("options.drho", "0.01", "initial rho offset from the series"));
            v.push_back(num("options.dpsi", "0", "initial psi offset from the series"));
            v.push_back({"options.tau_min", ValueType::Auto, "auto", "fit window start (auto: 3 t0)", {}});
            v.push_back(num("options.tau_max", "inf", "fit window end"));
            v.push_back({"options.emit_trajectory", ValueType::Bool, "false", "also write trajectory.csv", {}});
            break;
    }
    for (const auto* key : {"params.lambda", "options.tau_end", "options.horizon", "options.t_end", "options.epsilon",
                            "options.sample_dt", "options.t0", "options.shift"})
        positive(v, key);
    return v;
}

double RunConfig::number(const std::string& key) const { return std::get<double>(values.at(key)); }
long long RunConfig::integer(const std::string& key) const { return std::get<long long>(values.at(key)); }
bool RunConfig::flag(const std::string& key) const { return std::get<bool>(values.at(key)); }
const std::string& RunConfig::text(const std::string& key) const { return std::get<std::string>(values.at(key)); }
const Range& RunConfig::range(const std::string& key) const { return std::get<Range>(values.at(key)); }
const std::vector<double>& RunConfig::list(const std::string& key) const {
    return std::get<std::vector<double>>(values.at(key));
}
bool RunConfig::is_auto(const std::string& key) const { return std::isnan(number(key)); }

ModelParams RunConfig::params() const {
    const double lambda = number("params.lambda");
    const double nu = values.count("params.nu") ? number("params.nu") : 0.0;
    const double mu0 = values.count("params.mu0") ? number("params.mu0") : 0.0;
    if (values.count("params.profile") && text("params.profile") == "regularized")
        return ModelParams::regularized(lambda, nu, mu0, number("params.shift"));
    std::vector<double> mu{mu0};
    if (values.count("params.mu_tail"))
        for (double m : list("params.mu_tail")) mu.push_back(m);
    return ModelParams::asymptotic(lambda, nu, mu);
}

SolverConfig RunConfig::solver() const {
    SolverConfig c;
    if (!values.count("solver.rtol")) return c;
    c.rtol = number("solver.rtol");
    c.atol = number("solver.atol");
    c.h_init = number("solver.h_init");
    c.h_max = number("solver.h_max");
    c.guard_rho_min = number("solver.guard_rho_min");
    return c;
}

std::filesystem::path RunConfig::out_dir() const { return text("io.out_dir"); }
std::string RunConfig::format() const { return text("io.format"); }
std::uint64_t RunConfig::seed() const { return static_cast<std::uint64_t>(integer("seed")); }
unsigned RunConfig::threads() const { return static_cast<unsigned>(integer("threads")); }

nlohmann::ordered_json RunConfig::to_json(bool content_only) const {
    nlohmann::ordered_json j;
    j["subcommand"] = std::string(to_string(subcommand));
    for (const auto& spec : option_specs(subcommand)) {
        if (content_only && (spec.key == "io.out_dir" || spec.key == "threads")) continue;
        const auto dot = spec.key.find('.');
        const auto v = value_json(values.at(spec.key));
        if (dot == std::string::npos)
            j[spec.key] = v;
        else
            j[spec.key.substr(0, dot)][spec.key.substr(dot + 1)] = v;
    }
    return j;
}

RunConfig resolve_text(Subcommand s, const std::map<std::string, std::string>& flags, const std::string& config_text,
                       const std::string& origin, const std::optional<std::string>& env_out) {
    const auto specs = option_specs(s);
    RunConfig cfg;
    cfg.subcommand = s;

    auto find_spec = [&](const std::string& key) -> const OptionSpec* {
        for (const auto& sp : specs)
            if (sp.key == key) return &sp;
        return nullptr;
    };

    if (!config_text.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_text);
        } catch (const nlohmann::json::parse_error& e) {
            int line = 1;
            for (std::size_t i = 0; i < e.byte && i < config_text.size(); ++i)
                if (config_text[i] == '\n') ++line;
            throw ConfigError(origin + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
        }
        if (!j.is_object()) throw ConfigError(origin + ":1: config must be a JSON object");
        auto fail = [&](const std::string& section, const std::string& key, const std::string& path,
                        const std::string& msg) {
            throw ConfigError(origin + ":" + std::to_string(line_of(config_text, section, key)) + ": field '" + path +
                              "': " + msg);
        };
        for (const auto& [name, val] : j.items()) {
            if (name == "subcommand") {
                if (!val.is_string()) fail("", name, name, std::string("expected a string, got ") + val.type_name());
                if (val.get<std::string>() != to_string(s))
                    fail("", name, name,
                         "config is for '" + val.get<std::string>() + "', not '" + std::string(to_string(s)) + "'");
                continue;
            }
            if (const auto* sp = find_spec(name)) {
                auto r = parse_json(*sp, val);
                if (auto* err = std::get_if<std::string>(&r)) fail("", name, name, *err);
                cfg.values[name] = std::get<Value>(r);
                continue;
            }
            bool is_section = false;
            for (const auto& sp : specs)
                if (sp.key.rfind(name + ".", 0) == 0) is_section = true;
            if (!is_section) fail("", name, name, "unknown field for '" + std::string(to_string(s)) + "'");
            if (!val.is_object()) fail("", name, name, std::string("expected an object, got ") + val.type_name());
            for (const auto& [key, inner] : val.items()) {
                const std::string path = name + "." + key;
                const auto* sp = find_spec(path);
                if (!sp) fail(name, key, path, "unknown field for '" + std::string(to_string(s)) + "'");
                auto r = parse_json(*sp, inner);
                if (auto* err = std::get_if<std::string>(&r)) fail(name, key, path, *err);
                cfg.values[path] = std::get<Value>(r);
            }
        }
    }

    for (const auto& [key, raw] : flags) {
        const auto* sp = find_spec(key);
        if (!sp) throw ConfigError("unknown option '" + key + "'");
        auto r = parse_text(*sp, raw);
        if (auto* err = std::get_if<std::string>(&r)) throw ConfigError("flag " + sp->flag() + ": " + *err);
        cfg.values[key] = std::get<Value>(r);
    }

    for (const auto& sp : specs) {
        if (cfg.values.count(sp.key)) continue;
        auto r = parse_text(sp, sp.default_text);
        if (auto* err = std::get_if<std::string>(&r))
            throw ConfigError("internal default for " + sp.flag() + ": " + *err);
        cfg.values[sp.key] = std::get<Value>(r);
    }

    if (cfg.text("io.out_dir").empty()) cfg.values["io.out_dir"] = env_out && !env_out->empty() ? *env_out : ".";

    auto bad = [&](const std::string& key, const std::string& msg) {
        const auto* sp = find_spec(key);
        throw ConfigError("option " + (sp ? sp->flag() : key) + " / field '" + key + "': " + msg);
    };
    for (const auto& sp : specs) {
        const auto& v = cfg.values.at(sp.key);
        if (sp.positive && !std::isnan(std::get<double>(v)) && !(std::get<double>(v) > 0.0))
            bad(sp.key, "must be > 0, got " + value_text(v));
        if (sp.type == ValueType::Integer) {
            const long long i = std::get<long long>(v);
            const bool count = sp.key.rfind("options.n", 0) == 0 || sp.key == "options.samples" ||
                               sp.key == "options.orders" || sp.key == "options.nu_steps";
            if (count && i < 1) bad(sp.key, "must be >= 1, got " + std::to_string(i));
            if ((sp.key == "threads" || sp.key == "seed") && i < 0) bad(sp.key, "must be >= 0");
            if (sp.key == "options.branch" && i != 1 && i != -1) bad(sp.key, "must be +1 or -1");
        }
    }
    if (cfg.values.count("options.n_r") && (cfg.integer("options.n_r") < 2 || cfg.integer("options.n_psi") < 2))
        bad("options.n_r", "grids need at least 2 points per axis");
    try {
        cfg.params().validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    try {
        cfg.solver().validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    return cfg;
}

RunConfig resolve(Subcommand s, const std::map<std::string, std::string>& flags,
                  const std::filesystem::path& config_path, const std::optional<std::string>& env_out) {
    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw ConfigError(config_path.string() + ": cannot read config file");
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        if (text.find_first_not_of(" \t\r\n") == std::string::npos)
            throw ConfigError(config_path.string() + ":1: config file is empty");
    }
    return resolve_text(s, flags, text, config_path.string(), env_out);
}

}  // namespace autores::cli
