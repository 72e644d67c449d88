#include "elastomodes/material.hpp"

#include <nlohmann/json.hpp>

#include "elastomodes/hash.hpp"

namespace elastomodes {

using nlohmann::json;

MaterialField MaterialField::uniform(std::size_t n_elements, const ElasticTensord& c, double density)
{
    MaterialField f;
    f.tensors.assign(n_elements, c);
    f.densities.assign(n_elements, density);
    return f;
}

ValidationReport validate_field(const MaterialField& field)
{
    ValidationReport report;
    if (field.tensors.size() != field.densities.size()) {
        report.passed = false;
        report.failures.push_back({0, "tensor count differs from density count"});
        return report;
    }
    if (field.tensors.empty()) {
        report.passed = false;
        report.failures.push_back({0, "material field is empty"});
        return report;
    }
    report.element_alpha.reserve(field.size());
    for (std::size_t e = 0; e < field.size(); ++e) {
        const auto& c = field.tensors[e];
        const double rho = field.densities[e];
        if (!c.voigt().allFinite()) {
            report.failures.push_back({e, "non-finite moduli"});
            report.element_alpha.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double a = coercivity_constant(c);
        report.element_alpha.push_back(a);
        report.alpha = std::min(report.alpha, a);
        if (!(a > 0.0) || a < field.alpha_floor)
            report.failures.push_back({e, "tensor not positive definite above floor (min Mandel eigenvalue " +
                                              std::to_string(a) + ")"});
        if (!std::isfinite(rho)) {
            report.failures.push_back({e, "non-finite density"});
            continue;
        }
        report.beta = std::min(report.beta, rho);
        if (!(rho > 0.0) || rho < field.beta_floor)
            report.failures.push_back({e, "density " + std::to_string(rho) + " below floor"});
    }
    report.passed = report.failures.empty();
    return report;
}

namespace {

RegionMaterial parse_region(const json& j, const std::string& where)
{
    RegionMaterial r;
    if (!j.is_object()) throw MaterialError(where + ": expected an object");
    if (!j.contains("density") || !j["density"].is_number())
        throw MaterialError(where + ": missing numeric \"density\"");
    r.density = j["density"].get<double>();
    const bool iso = j.contains("isotropic");
    const bool voigt = j.contains("voigt");
    if (iso == voigt) throw MaterialError(where + ": exactly one of \"isotropic\" or \"voigt\" is required");
    if (iso) {
        const auto& p = j["isotropic"];
        if (!p.contains("lambda") || !p.contains("mu"))
            throw MaterialError(where + ": isotropic needs \"lambda\" and \"mu\"");
        r.tensor = ElasticTensord::isotropic(p["lambda"].get<double>(), p["mu"].get<double>());
    } else {
        const auto& v = j["voigt"];
        if (!v.is_array() || v.size() != 6) throw MaterialError(where + ": voigt must be a 6x6 array");
        ElasticTensord::Matrix6 m;
        for (int a = 0; a < 6; ++a) {
            if (!v[a].is_array() || v[a].size() != 6) throw MaterialError(where + ": voigt must be a 6x6 array");
            for (int b = 0; b < 6; ++b) m(a, b) = v[a][b].get<double>();
        }
        r.tensor = ElasticTensord::from_voigt(m);
    }
    return r;
}

} // namespace

MaterialSpec parse_material_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw MaterialError(std::string("material file is not valid JSON: ") + e.what());
    }
    MaterialSpec spec;
    try {
        if (j.contains("regions")) {
            for (const auto& [key, value] : j["regions"].items()) {
                int tag = 0;
                try {
                    tag = std::stoi(key);
                } catch (const std::exception&) {
                    throw MaterialError("region key \"" + key + "\" is not an integer tag");
                }
                spec.regions[tag] = parse_region(value, "region " + key);
            }
            if (j.contains("default")) spec.fallback = parse_region(j["default"], "default");
        } else {
            spec.fallback = parse_region(j, "material");
        }
        spec.alpha_floor = j.value("alpha_floor", 0.0);
        spec.beta_floor = j.value("beta_floor", 0.0);
    } catch (const json::exception& e) {
        throw MaterialError(std::string("material schema error: ") + e.what());
    }
    return spec;
}

MaterialSpec load_material_json(const std::filesystem::path& path)
{
    return parse_material_json(read_text_file(path));
}

MaterialField MaterialSpec::build(std::span<const int> element_regions) const
{
    MaterialField f;
    f.alpha_floor = alpha_floor;
    f.beta_floor = beta_floor;
    f.tensors.reserve(element_regions.size());
    f.densities.reserve(element_regions.size());
    for (std::size_t e = 0; e < element_regions.size(); ++e) {
        const int tag = element_regions[e];
        const RegionMaterial* r = nullptr;
        if (auto it = regions.find(tag); it != regions.end())
            r = &it->second;
        else if (fallback)
            r = &*fallback;
        else
            throw MaterialError("no material for region " + std::to_string(tag) + " (element " + std::to_string(e) +
                                ")");
        f.tensors.push_back(r->tensor);
        f.densities.push_back(r->density);
    }
    return f;
}

} // namespace elastomodes
