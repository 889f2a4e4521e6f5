#include "polyheat/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace polyheat::cli {

ConfigError::ConfigError(std::string field, const std::string &message)
    : ArgumentError(field + ": " + message), field_(std::move(field))
{
}

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string &key, const std::string &text)
{
    const std::string s = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError(key, "expected a finite number, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string &key, const std::string &text)
{
    const std::string s = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string &key, const std::string &text)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(parse_double(key, item));
    }
    return out;
}

std::string format_list(const std::vector<double> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + format_double(v[i]);
    }
    return s;
}

struct Field {
    std::string key;
    std::function<std::string(const RunConfig &)> get;
    std::function<nlohmann::json(const RunConfig &)> get_json;
    std::function<void(RunConfig &, const std::string &)> set;
};

Field number_field(std::string key, double RunConfig::*m)
{
    return {key, [m](const RunConfig &c) { return format_double(c.*m); },
            [m](const RunConfig &c) { return nlohmann::json(c.*m); },
            [m, key](RunConfig &c, const std::string &v) { c.*m = parse_double(key, v); }};
}

template <typename U>
Field integer_field(std::string key, U RunConfig::*m)
{
    return {key, [m](const RunConfig &c) { return std::to_string(c.*m); },
            [m](const RunConfig &c) { return nlohmann::json(c.*m); },
            [m, key](RunConfig &c, const std::string &v) {
                const std::uint64_t x = parse_unsigned(key, v);
                if (x > std::numeric_limits<U>::max()) {
                    throw ConfigError(key, "value " + v + " is out of range");
                }
                c.*m = static_cast<U>(x);
            }};
}

Field list_field(std::string key, std::vector<double> RunConfig::*m)
{
    return {key, [m](const RunConfig &c) { return format_list(c.*m); },
            [m](const RunConfig &c) { return nlohmann::json(c.*m); },
            [m, key](RunConfig &c, const std::string &v) { c.*m = parse_list(key, v); }};
}

Field text_field(std::string key, std::string RunConfig::*m)
{
    return {key, [m](const RunConfig &c) { return c.*m; }, [m](const RunConfig &c) { return nlohmann::json(c.*m); },
            [m](RunConfig &c, const std::string &v) { c.*m = trim(v); }};
}

template <typename E, typename Parse>
Field enum_field(std::string key, E RunConfig::*m, Parse parse)
{
    return {key, [m](const RunConfig &c) { return to_string(c.*m); },
            [m](const RunConfig &c) { return nlohmann::json(to_string(c.*m)); },
            [m, key, parse](RunConfig &c, const std::string &v) {
                try {
                    c.*m = parse(trim(v));
                } catch (const ArgumentError &e) {
                    throw ConfigError(key, e.what());
                }
            }};
}

const std::vector<Field> &fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(text_field("domain.kind", &RunConfig::domain));
        f.push_back(integer_field("domain.dimension", &RunConfig::dimension));
        f.push_back(number_field("domain.alpha", &RunConfig::alpha));
        f.push_back(number_field("domain.beta", &RunConfig::beta));
        f.push_back(number_field("domain.gamma", &RunConfig::gamma));
        f.push_back(list_field("domain.kappa", &RunConfig::kappa));
        f.push_back(integer_field("basis.max_degree", &RunConfig::max_degree));
        f.push_back(enum_field("basis.precision", &RunConfig::precision, parse_precision));
        f.push_back(enum_field("basis.construction", &RunConfig::construction, parse_construction));
        f.push_back(number_field("kernel.epsilon", &RunConfig::epsilon));
        f.push_back(number_field("kernel.t_min", &RunConfig::t_min));
        f.push_back(integer_field("grid.per_axis", &RunConfig::per_axis));
        f.push_back(number_field("grid.margin", &RunConfig::margin));
        f.push_back(list_field("grid.times", &RunConfig::times));
        f.push_back(list_field("grid.radii", &RunConfig::radii));
        f.push_back(list_field("grid.epsilons", &RunConfig::epsilons));
        f.push_back(integer_field("checks.eigen_degree", &RunConfig::eigen_degree));
        f.push_back(integer_field("checks.polynomials", &RunConfig::polynomials));
        f.push_back(integer_field("checks.poly_degree", &RunConfig::poly_degree));
        f.push_back(integer_field("checks.chart_samples", &RunConfig::chart_samples));
        f.push_back(integer_field("checks.correspondence_k", &RunConfig::correspondence_k));
        f.push_back(number_field("multiplier.bump_radius", &RunConfig::bump_radius));
        f.push_back(integer_field("multiplier.bump_order", &RunConfig::bump_order));
        f.push_back(list_field("multiplier.deltas", &RunConfig::deltas));
        f.push_back(number_field("multiplier.sinc_band", &RunConfig::sinc_band));
        f.push_back(integer_field("multiplier.sinc_order", &RunConfig::sinc_order));
        f.push_back(integer_field("mc.samples", &RunConfig::mc_samples));
        f.push_back({"mc.seed", [](const RunConfig &c) { return c.seed ? std::to_string(*c.seed) : std::string(); },
                     [](const RunConfig &c) { return c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr); },
                     [](RunConfig &c, const std::string &v) {
                         if (trim(v).empty()) {
                             c.seed.reset();
                         } else {
                             c.seed = parse_unsigned("mc.seed", v);
                         }
                     }});
        f.push_back(text_field("output.dir", &RunConfig::output_dir));
        return f;
    }();
    return table;
}

void require(bool ok, const std::string &key, const std::string &message)
{
    if (!ok) {
        throw ConfigError(key, message);
    }
}

void require_positive_list(const std::vector<double> &v, const std::string &key)
{
    require(!v.empty(), key, "needs at least one value");
    for (const double x : v) {
        require(x > 0.0, key, "values must be positive, got " + format_double(x));
    }
}

} // namespace

void RunConfig::set(const std::string &key, const std::string &value)
{
    const std::string k = trim(key);
    for (const auto &f : fields()) {
        if (f.key == k) {
            f.set(*this, value);
            return;
        }
    }
    throw ConfigError(k, "unknown configuration key");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto &f : fields()) {
        out.emplace_back(f.key, f.get(*this));
    }
    return out;
}

std::vector<std::string> RunConfig::keys()
{
    std::vector<std::string> out;
    for (const auto &f : fields()) {
        out.push_back(f.key);
    }
    return out;
}

DomainSpec RunConfig::spec() const
{
    DomainKind kind{};
    try {
        kind = parse_domain_kind(domain);
    } catch (const ArgumentError &e) {
        throw ConfigError("domain.kind", e.what());
    }
    switch (kind) {
    case DomainKind::Interval:
        require(alpha > -1.0, "domain.alpha",
                "interval weight requires α > −1 (alpha > -1), got alpha = " + format_double(alpha));
        require(beta > -1.0, "domain.beta",
                "interval weight requires β > −1 (beta > -1), got beta = " + format_double(beta));
        return DomainSpec::interval(alpha, beta);
    case DomainKind::Ball:
        require(dimension >= 1, "domain.dimension", "ball dimension must be positive");
        try {
            return DomainSpec::ball(dimension, gamma);
        } catch (const ParameterError &e) {
            throw ConfigError("domain.gamma", e.what());
        }
    case DomainKind::Simplex:
        require(kappa.size() >= 2, "domain.kappa", "simplex needs n + 1 >= 2 weight exponents");
        try {
            return DomainSpec::simplex(kappa);
        } catch (const ParameterError &e) {
            throw ConfigError("domain.kappa", e.what());
        }
    }
    throw ConfigError("domain.kind", "unreachable domain kind");
}

std::size_t RunConfig::resolved_degree() const { return max_degree ? max_degree : default_max_degree(spec()); }

unsigned RunConfig::resolved_bump_order() const
{
    return bump_order ? bump_order : static_cast<unsigned>(spec().dimension() + 2);
}

void RunConfig::validate() const
{
    const DomainSpec s = spec();
    const std::size_t cap = max_degree_capacity(s, precision, construction);
    require(resolved_degree() <= cap, "basis.max_degree",
            "degree " + std::to_string(resolved_degree()) + " exceeds the capacity " + std::to_string(cap) +
                " for this domain, precision and construction");
    require(epsilon > 0.0 && epsilon < 1.0, "kernel.epsilon", "must lie in (0, 1), got " + format_double(epsilon));
    require(t_min >= 0.0, "kernel.t_min", "must be non-negative (0 selects the default), got " + format_double(t_min));
    require(per_axis >= 2, "grid.per_axis", "needs at least 2 points per axis");
    require(margin >= 0.0 && margin < 0.5, "grid.margin", "must lie in [0, 1/2), got " + format_double(margin));
    require_positive_list(times, "grid.times");
    require_positive_list(radii, "grid.radii");
    for (const double r : radii) {
        require(r <= std::numbers::pi / 2, "grid.radii", "radii must lie in (0, π/2], got " + format_double(r));
    }
    require(epsilons.size() >= 4, "grid.epsilons", "needs at least 4 values");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        require(epsilons[i] > 0.0 && epsilons[i] < 0.5, "grid.epsilons",
                "values must lie in (0, 1/2), got " + format_double(epsilons[i]));
        require(i == 0 || epsilons[i] < epsilons[i - 1], "grid.epsilons", "values must be strictly decreasing");
    }
    require(polynomials >= 1, "checks.polynomials", "needs at least one polynomial");
    require(chart_samples >= 1, "checks.chart_samples", "needs at least one sample");
    require(correspondence_k >= 1, "checks.correspondence_k", "must be positive");
    require(bump_radius > 0.0, "multiplier.bump_radius", "must be positive, got " + format_double(bump_radius));
    require(bump_order == 0 || bump_order >= s.dimension() + 1, "multiplier.bump_order",
            "order m must satisfy m ≥ n + 1 = " + std::to_string(s.dimension() + 1));
    require_positive_list(deltas, "multiplier.deltas");
    require(sinc_band > 0.0, "multiplier.sinc_band", "must be positive, got " + format_double(sinc_band));
    require(sinc_order >= 1, "multiplier.sinc_order", "must be positive");
    require(mc_samples >= 1000, "mc.samples", "needs at least 1000 samples");
    require(!output_dir.empty(), "output.dir", "must not be empty");
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto &f : fields()) {
        const auto dot = f.key.find('.');
        j[f.key.substr(0, dot)][f.key.substr(dot + 1)] = f.get_json(*this);
    }
    return j;
}

std::string RunConfig::to_ini() const
{
    std::string out;
    std::string section;
    for (const auto &f : fields()) {
        const auto dot = f.key.find('.');
        const std::string sec = f.key.substr(0, dot);
        if (sec != section) {
            out += (section.empty() ? "[" : "\n[") + sec + "]\n";
            section = sec;
        }
        out += f.key.substr(dot + 1) + " = " + f.get(*this) + "\n";
    }
    return out;
}

RunConfig parse_config(std::istream &in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError("config", e.message() + " at line " + std::to_string(e.line()));
    }
    RunConfig c;
    for (const auto &[section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(section, "keys must live inside a [section]");
        }
        for (const auto &[name, value] : body) {
            c.set(section + "." + name, value.data());
        }
    }
    return c;
}

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open '" + path + "'");
    }
    return parse_config(in);
}

void apply_overrides(RunConfig &config, const std::vector<std::string> &overrides)
{
    for (const auto &o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(o, "override must have the form key=value");
        }
        config.set(o.substr(0, eq), o.substr(eq + 1));
    }
}

} // namespace polyheat::cli
