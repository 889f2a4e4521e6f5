#include "polyheat/domain.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "polyheat/errors.hpp"

namespace polyheat {

namespace {

std::string fmt_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string to_string(DomainKind kind)
{
    switch (kind) {
    case DomainKind::Interval:
        return "interval";
    case DomainKind::Ball:
        return "ball";
    case DomainKind::Simplex:
        return "simplex";
    }
    return "unknown";
}

DomainKind parse_domain_kind(std::string_view name)
{
    if (name == "interval") {
        return DomainKind::Interval;
    }
    if (name == "ball") {
        return DomainKind::Ball;
    }
    if (name == "simplex") {
        return DomainKind::Simplex;
    }
    throw ArgumentError("unknown domain kind '" + std::string(name) + "' (expected interval, ball or simplex)");
}

DomainSpec::DomainSpec(DomainKind kind, std::size_t n, std::vector<double> params)
    : kind_(kind), n_(n), params_(std::move(params))
{
}

DomainSpec DomainSpec::interval(double alpha, double beta)
{
    if (!(alpha > -1.0) || !std::isfinite(alpha)) {
        throw ParameterError("interval weight requires α > −1 (alpha > -1), got alpha = " + fmt_double(alpha));
    }
    if (!(beta > -1.0) || !std::isfinite(beta)) {
        throw ParameterError("interval weight requires β > −1 (beta > -1), got beta = " + fmt_double(beta));
    }
    return DomainSpec(DomainKind::Interval, 1, {alpha, beta});
}

DomainSpec DomainSpec::ball(std::size_t n, double gamma)
{
    if (n == 0) {
        throw ArgumentError("ball dimension must be positive");
    }
    if (!(gamma > -0.5) || !std::isfinite(gamma)) {
        throw ParameterError("ball weight requires γ > −1/2 (gamma > -1/2), got gamma = " + fmt_double(gamma));
    }
    return DomainSpec(DomainKind::Ball, n, {gamma});
}

DomainSpec DomainSpec::simplex(std::vector<double> kappa)
{
    if (kappa.size() < 2) {
        throw ArgumentError("simplex needs n + 1 >= 2 weight exponents kappa");
    }
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        if (!(kappa[i] > -0.5) || !std::isfinite(kappa[i])) {
            throw ParameterError("simplex weight requires κ_i > −1/2 (kappa_i > -1/2), got kappa_" +
                                 std::to_string(i + 1) + " = " + fmt_double(kappa[i]));
        }
    }
    const std::size_t n = kappa.size() - 1;
    return DomainSpec(DomainKind::Simplex, n, std::move(kappa));
}

double DomainSpec::alpha() const
{
    if (kind_ != DomainKind::Interval) {
        throw ArgumentError("alpha is defined only for the interval");
    }
    return params_[0];
}

double DomainSpec::beta() const
{
    if (kind_ != DomainKind::Interval) {
        throw ArgumentError("beta is defined only for the interval");
    }
    return params_[1];
}

double DomainSpec::gamma() const
{
    if (kind_ != DomainKind::Ball) {
        throw ArgumentError("gamma is defined only for the ball");
    }
    return params_[0];
}

const std::vector<double> &DomainSpec::kappa() const
{
    if (kind_ != DomainKind::Simplex) {
        throw ArgumentError("kappa is defined only for the simplex");
    }
    return params_;
}

double DomainSpec::kappa_sum() const
{
    const auto &k = kappa();
    return std::accumulate(k.begin(), k.end(), 0.0);
}

std::string DomainSpec::describe() const
{
    std::ostringstream os;
    os << to_string(kind_) << "(n=" << n_;
    switch (kind_) {
    case DomainKind::Interval:
        os << ", alpha=" << params_[0] << ", beta=" << params_[1];
        break;
    case DomainKind::Ball:
        os << ", gamma=" << params_[0];
        break;
    case DomainKind::Simplex:
        os << ", kappa=(";
        for (std::size_t i = 0; i < params_.size(); ++i) {
            os << (i ? "," : "") << params_[i];
        }
        os << ")";
        break;
    }
    os << ")";
    return os.str();
}

nlohmann::json DomainSpec::to_json() const
{
    nlohmann::json j{{"kind", to_string(kind_)}, {"n", n_}};
    switch (kind_) {
    case DomainKind::Interval:
        j["alpha"] = params_[0];
        j["beta"] = params_[1];
        break;
    case DomainKind::Ball:
        j["gamma"] = params_[0];
        break;
    case DomainKind::Simplex:
        j["kappa"] = params_;
        break;
    }
    return j;
}

DomainSpec DomainSpec::from_json(const nlohmann::json &j)
{
    const auto kind = parse_domain_kind(j.at("kind").get<std::string>());
    switch (kind) {
    case DomainKind::Interval:
        return interval(j.at("alpha").get<double>(), j.at("beta").get<double>());
    case DomainKind::Ball:
        return ball(j.at("n").get<std::size_t>(), j.at("gamma").get<double>());
    case DomainKind::Simplex:
        return simplex(j.at("kappa").get<std::vector<double>>());
    }
    throw ArgumentError("unreachable domain kind");
}

} // namespace polyheat
