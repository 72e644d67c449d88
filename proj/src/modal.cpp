#include "elastomodes/modal.hpp"

#include <cmath>
#include <set>

#include "elastomodes/hash.hpp"

namespace elastomodes {

void FrequencySpectrum::validate() const
{
    std::set<double> seen;
    for (std::size_t j = 0; j < components.size(); ++j) {
        const auto& c = components[j];
        if (!std::isfinite(c.omega)) throw Error("spectrum entry " + std::to_string(j) + " has a non-finite omega");
        if (!seen.insert(c.omega).second)
            throw Error("spectrum frequency " + std::to_string(c.omega) + " appears more than once");
        if (!c.body.allFinite()) throw Error("spectrum entry " + std::to_string(j) + " has non-finite body amplitude");
        for (const auto& [sel, g] : c.traction)
            if (!g.allFinite())
                throw Error("spectrum entry " + std::to_string(j) + " has non-finite traction on " + sel);
    }
}

FrequencySpectrum FrequencySpectrum::time_shifted(double dt) const
{
    FrequencySpectrum out = *this;
    for (auto& c : out.components) {
        const cplx phase = std::exp(cplx(0.0, c.omega * dt));
        c.body *= phase;
        for (auto& entry : c.traction) entry.second *= phase;
    }
    return out;
}

HarmonicLoad assemble_harmonic_load(const AssemblyContext& ctx, const FrequencyComponent& component)
{
    const auto split = [&](auto part) {
        std::vector<std::pair<std::string, Eigen::Vector3d>> real;
        for (const auto& [sel, g] : component.traction) real.emplace_back(sel, part(g));
        return real;
    };
    const auto re = [](const Eigen::Vector3cd& v) { return Eigen::Vector3d(v.real()); };
    const auto im = [](const Eigen::Vector3cd& v) { return Eigen::Vector3d(v.imag()); };

    HarmonicLoad load;
    load.omega = component.omega;
    load.body = assemble_body_load(ctx.mesh, ctx.dofs, re(component.body)).cast<cplx>() +
                cplx(0.0, 1.0) * assemble_body_load(ctx.mesh, ctx.dofs, im(component.body)).cast<cplx>();
    load.traction =
        assemble_traction_load(ctx.mesh, ctx.dofs, resolve_tractions(ctx.mesh, split(re))).cast<cplx>() +
        cplx(0.0, 1.0) * assemble_traction_load(ctx.mesh, ctx.dofs, resolve_tractions(ctx.mesh, split(im))).cast<cplx>();
    return load;
}

std::vector<Eigen::VectorXd> dynamic_synthesize(const ModeSet& modes, std::span<const HarmonicLoad> loads,
                                                std::span<const double> times, double guard)
{
    // Per frequency: the complex field sum_n alpha_n(omega_j) u_n.
    std::vector<Eigen::VectorXcd> fields;
    fields.reserve(loads.size());
    for (const auto& load : loads) {
        const auto p = project_sources<cplx>(modes, load.body, load.traction);
        fields.push_back(synthesize(modes, harmonic_coefficients<cplx>(modes, p.f, p.g, load.omega, guard)));
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(times.size());
    for (double t : times) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(modes.num_dofs());
        for (std::size_t j = 0; j < loads.size(); ++j)
            u += (std::exp(cplx(0.0, loads[j].omega * t)) * fields[j]).real();
        out.push_back(std::move(u));
    }
    return out;
}

std::vector<Eigen::VectorXd> dynamic_synthesize(const ModeSet& modes, const FrequencySpectrum& spectrum,
                                                std::span<const double> times, const AssemblyContext& ctx,
                                                double guard)
{
    spectrum.validate();
    std::vector<HarmonicLoad> loads;
    loads.reserve(spectrum.components.size());
    for (const auto& c : spectrum.components) loads.push_back(assemble_harmonic_load(ctx, c));
    return dynamic_synthesize(modes, loads, times, guard);
}

namespace {

cplx complex_value(const nlohmann::json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw Error("spectrum amplitude must be a number or [re, im]");
}

Eigen::Vector3cd complex_vec3(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 3) throw Error("spectrum amplitude must have three components");
    return {complex_value(j[0]), complex_value(j[1]), complex_value(j[2])};
}

} // namespace

FrequencySpectrum parse_spectrum_json(const std::string& text)
{
    FrequencySpectrum s;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& list = j.is_object() ? j.at("components") : j;
        for (const auto& e : list) {
            FrequencyComponent c;
            c.omega = e.at("omega").get<double>();
            if (e.contains("body")) c.body = complex_vec3(e["body"]);
            if (e.contains("traction"))
                for (const auto& [sel, g] : e["traction"].items()) c.traction.emplace_back(sel, complex_vec3(g));
            s.components.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("spectrum file error: ") + e.what());
    }
    s.validate();
    return s;
}

FrequencySpectrum load_spectrum_json(const std::filesystem::path& path)
{
    return parse_spectrum_json(read_text_file(path));
}

nlohmann::json truncation_to_json(const TruncationReport& r)
{
    nlohmann::json j;
    j["retained"] = r.retained;
    j["tail_magnitudes"] = r.tail;
    j["energy_fraction"] = r.energy_fraction;
    j["relative_error"] = r.relative_error ? nlohmann::json(*r.relative_error) : nlohmann::json(nullptr);
    return j;
}

} // namespace elastomodes
