#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyheat/errors.hpp"

namespace polyheat {

using Point = std::vector<double>;

enum class DomainKind { Interval, Ball, Simplex };

std::string to_string(DomainKind kind);
DomainKind parse_domain_kind(std::string_view name);

/// Domain kind, dimension and weight parameters. Immutable; construction validates
/// alpha, beta > -1 (interval), gamma > -1/2 (ball), kappa_i > -1/2 (simplex).
class DomainSpec {
public:
    static DomainSpec interval(double alpha, double beta);
    static DomainSpec ball(std::size_t n, double gamma);
    /// n = kappa.size() - 1.
    static DomainSpec simplex(std::vector<double> kappa);

    DomainKind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return n_; }

    double alpha() const;
    double beta() const;
    double gamma() const;
    const std::vector<double> &kappa() const;
    double kappa_sum() const;

    /// Weight parameters in declaration order: (alpha, beta), (gamma) or (kappa_1..kappa_{n+1}).
    const std::vector<double> &params() const noexcept { return params_; }

    std::string describe() const;
    nlohmann::json to_json() const;
    static DomainSpec from_json(const nlohmann::json &j);

    friend bool operator==(const DomainSpec &, const DomainSpec &) = default;

private:
    DomainSpec(DomainKind kind, std::size_t n, std::vector<double> params);

    DomainKind kind_;
    std::size_t n_;
    std::vector<double> params_;
};

} // namespace polyheat
