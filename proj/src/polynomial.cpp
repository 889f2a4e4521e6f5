#include "polyheat/polynomial.hpp"

namespace polyheat {

nlohmann::json to_json(const MultiPoly &p)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[idx, c] : p.terms()) {
        const auto e = idx.exponents();
        terms.push_back(nlohmann::json::array({std::vector<unsigned>(e.begin(), e.end()), c}));
    }
    return {{"dimension", p.dimension()}, {"terms", std::move(terms)}};
}

MultiPoly multipoly_from_json(const nlohmann::json &j)
{
    if (!j.is_object() || !j.contains("dimension") || !j.contains("terms")) {
        throw ArgumentError("polynomial JSON needs 'dimension' and 'terms'");
    }
    const auto n = j.at("dimension").get<std::size_t>();
    std::vector<std::pair<MultiIndex, double>> terms;
    for (const auto &t : j.at("terms")) {
        if (!t.is_array() || t.size() != 2) {
            throw ArgumentError("polynomial term must be [[exponents...], coefficient]");
        }
        terms.emplace_back(MultiIndex(t[0].get<std::vector<unsigned>>()), t[1].get<double>());
    }
    return MultiPoly::from_terms(n, terms);
}

} // namespace polyheat
