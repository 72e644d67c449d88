// elastomodes command-line front end.
//
// Exit codes: 0 ok, 2 usage, 3 input validation, 4 solver failure,
// 5 resonance, 6 mesh invariant violation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "elastomodes/assembly.hpp"
#include "elastomodes/hash.hpp"
#include "elastomodes/material.hpp"
#include "elastomodes/mesh.hpp"
#include "elastomodes/modal.hpp"
#include "elastomodes/modeset_io.hpp"
#include "elastomodes/solver.hpp"
#include "elastomodes/vtk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace elastomodes;

namespace {

enum Exit { kOk = 0, kUsage = 2, kValidation = 3, kSolver = 4, kResonance = 5, kMesh = 6 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string mesh;
    std::string dir_tags;
    std::string neu_tags;
    std::string material;
    std::string sources;
    std::string spectrum;
    std::string modes_file;
    std::string out_dir = ".";
    std::string times;
    std::vector<double> omegas;
    int num_modes = 0;
    bool compare_direct = false;
    bool direct = false;
    bool json_modes = false;
    bool no_vtk = false;
    double tol_cg = 1e-10;
    double tol_eig = 1e-8;
    double shift = 0.0;
    double guard = kDefaultResonanceGuard;

    // box helper
    std::string cells = "8,2,2";
    std::string size = "4,1,1";
    std::string dirichlet = "x0";
    std::string out = "mesh.json";
};

std::set<int> parse_tags(const std::string& text)
{
    std::set<int> tags;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            tags.insert(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad physical tag '" + item + "'");
        }
    }
    return tags;
}

template <typename T>
std::array<T, 3> parse_triple(const std::string& text, const char* what)
{
    std::array<T, 3> v{};
    std::stringstream ss(text);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i == 3) throw UsageError(std::string(what) + " needs three comma-separated values");
        std::istringstream is(item);
        if (!(is >> v[i]) || !(is >> std::ws).eof()) throw UsageError(std::string("bad ") + what + " '" + text + "'");
        ++i;
    }
    if (i != 3) throw UsageError(std::string(what) + " needs three comma-separated values");
    return v;
}

/// "t0:t1:n" (n samples, inclusive) or "a,b,c".
std::vector<double> parse_times(const std::string& text)
{
    std::vector<double> out;
    if (text.empty()) throw UsageError("--times is required");
    const auto bad = [&] { return UsageError("bad --times '" + text + "'"); };
    if (text.find(':') != std::string::npos) {
        double t0, t1;
        int n;
        char c1, c2;
        std::istringstream is(text);
        if (!(is >> t0 >> c1 >> t1 >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || !(is >> std::ws).eof())
            throw bad();
        for (int i = 0; i < n; ++i) out.push_back(n == 1 ? t0 : t0 + (t1 - t0) * i / (n - 1));
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        double t;
        if (!(is >> t) || !(is >> std::ws).eof()) throw bad();
        out.push_back(t);
    }
    if (out.empty()) throw bad();
    return out;
}

json file_entry(const std::string& path)
{
    return {{"name", fs::path(path).filename().string()}, {"sha256", sha256_file(path)}};
}

struct Context {
    const Config& cfg;
    std::string command;
    json inputs = json::object();
    json outputs = json::array();

    fs::path out(const std::string& name)
    {
        fs::create_directories(cfg.out_dir);
        outputs.push_back(name);
        return fs::path(cfg.out_dir) / name;
    }

    json provenance(const json& parameters) const
    {
        return {{"tool", "elastomodes"},
                {"version", ELASTOMODES_VERSION},
                {"command", command},
                {"inputs", inputs},
                {"parameters", parameters},
                {"tolerances",
                 {{"cg", cfg.tol_cg}, {"eigen_residual", cfg.tol_eig}, {"resonance_guard", cfg.guard}}}};
    }

    void write_json(const std::string& name, json report, const json& parameters)
    {
        const fs::path path = out(name);
        report["provenance"] = provenance(parameters);
        report["provenance"]["outputs"] = outputs;
        std::ofstream f(path, std::ios::trunc);
        f << report.dump(2) << "\n";
        if (!f) throw std::runtime_error("cannot write " + path.string());
    }
};

Mesh load_mesh(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    ctx.inputs["mesh"] = file_entry(cfg.mesh);
    if (fs::path(cfg.mesh).extension() == ".msh") {
        if (cfg.dir_tags.empty()) throw UsageError("--dir-tags is required for .msh meshes");
        ctx.inputs["mesh"]["dirichlet_tags"] = cfg.dir_tags;
        ctx.inputs["mesh"]["neumann_tags"] = cfg.neu_tags;
        return load_gmsh_msh2(cfg.mesh, parse_tags(cfg.dir_tags), parse_tags(cfg.neu_tags));
    }
    return load_mesh_json(cfg.mesh);
}

MaterialField load_material(Context& ctx, const Mesh& mesh, ValidationReport* report = nullptr)
{
    if (ctx.cfg.material.empty()) throw UsageError("--material is required");
    ctx.inputs["material"] = file_entry(ctx.cfg.material);
    const auto regions = mesh.element_regions();
    MaterialField field = load_material_json(ctx.cfg.material).build(regions);
    const ValidationReport r = validate_field(field);
    if (report) *report = r;
    if (!r.passed && !report) {
        const auto& f = r.failures.front();
        throw MaterialError("element " + std::to_string(f.element) + ": " + f.reason);
    }
    return field;
}

SolveOptions solve_options(const Config& cfg)
{
    SolveOptions o;
    o.cg_tolerance = cfg.tol_cg;
    o.eigen_tolerance = cfg.tol_eig;
    o.shift = cfg.shift;
    try {
        o.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return o;
}

// ---------------------------------------------------------------- validate

int cmd_validate(Context& ctx)
{
    json report;
    std::optional<Mesh> mesh;
    try {
        mesh.emplace(load_mesh(ctx));
    } catch (const MeshError& e) {
        report["mesh"] = {{"passed", false}, {"error", e.what()}};
        ctx.write_json("validation.json", report, json::object());
        throw;
    }
    const DofMap dofs(*mesh);
    double volume = 0.0;
    std::size_t n_dir = 0;
    for (std::size_t t = 0; t < mesh->num_tets(); ++t) volume += mesh->tet_volume(t);
    for (const auto& f : mesh->facets()) n_dir += f.kind == BoundaryKind::Dirichlet;
    report["mesh"] = {{"passed", true},
                      {"nodes", mesh->num_nodes()},
                      {"tets", mesh->num_tets()},
                      {"facets", mesh->num_facets()},
                      {"dirichlet_facets", n_dir},
                      {"neumann_facets", mesh->num_facets() - n_dir},
                      {"free_dofs", dofs.num_free()},
                      {"volume", volume},
                      {"fingerprint", mesh->fingerprint()}};

    ValidationReport r;
    load_material(ctx, *mesh, &r);
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"element", f.element}, {"reason", f.reason}});
    report["material"] = {{"passed", r.passed}, {"alpha", r.alpha}, {"beta", r.beta}, {"failures", failures}};
    ctx.write_json("validation.json", report, json::object());
    std::cout << "mesh ok: " << mesh->num_nodes() << " nodes, " << mesh->num_tets() << " tets, " << dofs.num_free()
              << " free dofs\n";
    std::cout << "material " << (r.passed ? "ok" : "FAILED") << ": alpha = " << r.alpha << ", beta = " << r.beta
              << "\n";
    if (!r.passed) {
        for (std::size_t i = 0; i < std::min<std::size_t>(r.failures.size(), 5); ++i)
            std::cerr << "element " << r.failures[i].element << ": " << r.failures[i].reason << "\n";
        if (r.failures.size() > 5) std::cerr << "... " << r.failures.size() - 5 << " more in validation.json\n";
        return kValidation;
    }
    return kOk;
}

// ---------------------------------------------------------------- modes

int cmd_modes(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const Mesh mesh = load_mesh(ctx);
    const MaterialField field = load_material(ctx, mesh);
    const DofMap dofs(mesh);
    const int count = cfg.num_modes > 0 ? cfg.num_modes : 10;
    if (count > dofs.num_free())
        throw UsageError("--num-modes " + std::to_string(count) + " exceeds the " + std::to_string(dofs.num_free()) +
                         " free dofs");
    const SolveOptions opts = solve_options(cfg);
    const SymSparse k = assemble_stiffness(mesh, field, dofs);
    const SymSparse m = assemble_mass(mesh, field, dofs);
    const ModeSet modes = eigs_smallest(k, m, count, opts).with_fingerprint(mesh.fingerprint());
    const Eigen::VectorXd residuals = residual_report(k, m, modes);
    const double ortho = orthonormality_deviation(m, modes.modes());

    const json params = {{"num_modes", count}, {"shift", cfg.shift}};
    const json extra = {{"provenance", ctx.provenance(params)}};
    write_modeset(ctx.out("modes.bin"), modes, extra);
    if (cfg.json_modes) write_modeset(ctx.out("modes.json"), modes, extra);
    if (!cfg.no_vtk) {
        std::vector<NodalField> fields;
        for (Eigen::Index n = 0; n < modes.num_modes(); ++n)
            fields.emplace_back("mode_" + std::to_string(n), dofs.expand(modes.mode(n)));
        for (std::size_t n = 0; n < fields.size(); ++n)
            write_vtk(ctx.out("mode_" + std::to_string(n) + ".vtk"), mesh, {fields[n]});
    }

    json table = json::array();
    for (Eigen::Index n = 0; n < modes.num_modes(); ++n)
        table.push_back({{"n", n},
                         {"lambda", modes.lambda(n)},
                         {"omega", std::sqrt(modes.lambda(n))},
                         {"residual", residuals(n)}});
    const json summary = {{"modes", table},
                          {"orthonormality_deviation", ortho},
                          {"max_residual", residuals.maxCoeff()},
                          {"free_dofs", dofs.num_free()},
                          {"mesh_fingerprint", mesh.fingerprint()}};
    ctx.write_json("modes_summary.json", summary, params);
    std::cout << "computed " << count << " modes; lambda_0 = " << modes.lambda(0)
              << ", max residual = " << residuals.maxCoeff() << ", orthonormality deviation = " << ortho << "\n";
    return kOk;
}

// ------------------------------------------------------- shared solution setup

struct Problem {
    Mesh mesh;
    MaterialField field;
    DofMap dofs;
    SymSparse k;
    SymSparse m;
    std::optional<ModeSet> modes;
};

Problem setup_problem(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.direct == !cfg.modes_file.empty())
        throw UsageError("give exactly one of --modes-file or --direct");
    Mesh mesh = load_mesh(ctx);
    MaterialField field = load_material(ctx, mesh);
    DofMap dofs(mesh);
    SymSparse k = assemble_stiffness(mesh, field, dofs);
    SymSparse m = assemble_mass(mesh, field, dofs);
    std::optional<ModeSet> modes;
    if (!cfg.modes_file.empty()) {
        ctx.inputs["modes"] = file_entry(cfg.modes_file);
        ModeSet loaded = read_modeset(cfg.modes_file);
        if (loaded.mesh_fingerprint() != mesh.fingerprint())
            throw FormatError("mode file was computed on a different mesh (fingerprint " +
                              loaded.mesh_fingerprint().substr(0, 12) + " vs " + mesh.fingerprint().substr(0, 12) +
                              ")");
        if (loaded.num_dofs() != dofs.num_free()) throw FormatError("mode file dof count does not match the mesh");
        if (cfg.num_modes > 0) {
            if (cfg.num_modes > loaded.num_modes())
                throw UsageError("--num-modes exceeds the " + std::to_string(loaded.num_modes()) + " stored modes");
            loaded = loaded.truncated(cfg.num_modes);
        }
        modes = std::move(loaded);
    }
    return {std::move(mesh), std::move(field), std::move(dofs), std::move(k), std::move(m), std::move(modes)};
}

json solve_params(const Config& cfg, const Problem& p)
{
    json j = {{"method", p.modes ? "modal" : "direct"}, {"compare_direct", cfg.compare_direct}};
    if (p.modes) j["retained_modes"] = p.modes->num_modes();
    return j;
}

// ---------------------------------------------------------------- static

int cmd_static(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.sources.empty()) throw UsageError("--sources is required");
    const Problem p = setup_problem(ctx);
    ctx.inputs["sources"] = file_entry(cfg.sources);
    const SourceSpec src = load_source_json(cfg.sources);
    const LoadVector body = src.body_load(p.mesh, p.dofs);
    const LoadVector trac = src.traction_load(p.mesh, p.dofs);
    const SolveOptions opts = solve_options(cfg);

    json report;
    std::vector<NodalField> fields;
    std::optional<Eigen::VectorXd> direct;
    if (cfg.direct || cfg.compare_direct) {
        CgStats stats;
        direct = solve_static(p.k, body + trac, opts, &stats);
        report["direct"] = {{"cg_iterations", stats.iterations}, {"relative_residual", stats.relative_residual}};
    }
    Eigen::VectorXd u;
    if (p.modes) {
        const auto pr = project_sources<double>(*p.modes, body, trac);
        const auto c = static_coefficients<double>(*p.modes, pr.f, pr.g);
        u = synthesize(*p.modes, c);
        report["coefficients"] = coefficients_to_json(*p.modes, c);
        const auto tr = truncation_report(*p.modes, c, c.size(), direct ? &p.m : nullptr, direct ? &*direct : nullptr);
        report["truncation"] = truncation_to_json(tr);
        if (tr.relative_error) {
            report["relative_error_m_norm"] = *tr.relative_error;
            std::cout << "relative L2_rho error vs direct solve: " << *tr.relative_error << "\n";
        }
    } else {
        u = *direct;
    }
    const double uku = u.dot(p.k * u);
    report["work_balance"] = {{"uKu", uku}, {"uF", u.dot(body + trac)}};
    fields.emplace_back("displacement", p.dofs.expand(u));
    if (direct && p.modes) fields.emplace_back("direct", p.dofs.expand(*direct));
    if (!cfg.no_vtk) write_vtk(ctx.out("static.vtk"), p.mesh, fields);
    ctx.write_json("static.json", report, solve_params(cfg, p));
    std::cout << "static solution written to " << cfg.out_dir << "\n";
    return kOk;
}

// ---------------------------------------------------------------- harmonic

int cmd_harmonic(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.sources.empty()) throw UsageError("--sources is required");
    if (cfg.omegas.empty()) throw UsageError("at least one --omega is required");
    const Problem p = setup_problem(ctx);
    ctx.inputs["sources"] = file_entry(cfg.sources);
    const SourceSpec src = load_source_json(cfg.sources);
    const Eigen::VectorXcd body = src.body_load(p.mesh, p.dofs).cast<cplx>();
    const Eigen::VectorXcd trac = src.traction_load(p.mesh, p.dofs).cast<cplx>();

    json report;
    auto& freq = report["frequencies"] = json::array();
    for (std::size_t j = 0; j < cfg.omegas.size(); ++j) {
        const double omega = cfg.omegas[j];
        json entry = {{"omega", omega}};
        std::optional<Eigen::VectorXcd> direct;
        if (cfg.direct || cfg.compare_direct) direct = solve_harmonic_direct(p.k, p.m, omega, body + trac);
        Eigen::VectorXcd u;
        if (p.modes) {
            const auto pr = project_sources<cplx>(*p.modes, body, trac);
            const auto c = harmonic_coefficients<cplx>(*p.modes, pr.f, pr.g, omega, cfg.guard);
            u = synthesize(*p.modes, c);
            entry["coefficients"] = coefficients_to_json(*p.modes, c);
            if (direct) {
                const double err = m_norm(p.m, Eigen::VectorXcd(u - *direct)) / m_norm(p.m, *direct);
                entry["relative_error_m_norm"] = err;
                std::cout << "omega = " << omega << ": relative L2_rho error vs direct solve: " << err << "\n";
            }
        } else {
            u = *direct;
        }
        std::vector<NodalField> fields{{"displacement_re", p.dofs.expand(Eigen::VectorXd(u.real()))},
                                       {"displacement_im", p.dofs.expand(Eigen::VectorXd(u.imag()))}};
        if (direct && p.modes) {
            fields.emplace_back("direct_re", p.dofs.expand(Eigen::VectorXd(direct->real())));
            fields.emplace_back("direct_im", p.dofs.expand(Eigen::VectorXd(direct->imag())));
        }
        const std::string name = "harmonic_" + std::to_string(j) + ".vtk";
        if (!cfg.no_vtk) write_vtk(ctx.out(name), p.mesh, fields);
        freq.push_back(std::move(entry));
    }
    json params = solve_params(cfg, p);
    params["omegas"] = cfg.omegas;
    ctx.write_json("harmonic.json", report, params);
    std::cout << "harmonic solutions for " << cfg.omegas.size() << " frequencies written to " << cfg.out_dir << "\n";
    return kOk;
}

// ---------------------------------------------------------------- dynamic

int cmd_dynamic(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.spectrum.empty()) throw UsageError("--spectrum is required");
    const std::vector<double> times = parse_times(cfg.times);
    const Problem p = setup_problem(ctx);
    ctx.inputs["spectrum"] = file_entry(cfg.spectrum);
    const FrequencySpectrum spectrum = load_spectrum_json(cfg.spectrum);
    const AssemblyContext actx{p.mesh, p.dofs};

    std::vector<HarmonicLoad> loads;
    for (const auto& c : spectrum.components) loads.push_back(assemble_harmonic_load(actx, c));

    std::vector<Eigen::VectorXd> direct;
    if (cfg.direct || cfg.compare_direct) {
        std::vector<Eigen::VectorXcd> per_freq;
        for (const auto& l : loads) per_freq.push_back(solve_harmonic_direct(p.k, p.m, l.omega, l.body + l.traction));
        for (double t : times) {
            Eigen::VectorXd u = Eigen::VectorXd::Zero(p.dofs.num_free());
            for (std::size_t j = 0; j < loads.size(); ++j)
                u += (std::exp(cplx(0.0, loads[j].omega * t)) * per_freq[j]).real();
            direct.push_back(std::move(u));
        }
    }
    json report;
    report["times"] = times;
    std::vector<Eigen::VectorXd> u;
    if (p.modes) {
        u = dynamic_synthesize(*p.modes, loads, times, cfg.guard);
        auto& coeffs = report["coefficients"] = json::array();
        for (const auto& l : loads) {
            const auto pr = project_sources<cplx>(*p.modes, l.body, l.traction);
            coeffs.push_back(coefficients_to_json(*p.modes, harmonic_coefficients<cplx>(*p.modes, pr.f, pr.g, l.omega,
                                                                                        cfg.guard)));
        }
        if (!direct.empty()) {
            double max_diff = 0.0;
            json errs = json::array();
            for (std::size_t i = 0; i < times.size(); ++i) {
                max_diff = std::max(max_diff, (u[i] - direct[i]).cwiseAbs().maxCoeff());
                const double ref = m_norm(p.m, direct[i]);
                errs.push_back(ref > 0.0 ? m_norm(p.m, Eigen::VectorXd(u[i] - direct[i])) / ref : 0.0);
            }
            report["max_nodal_difference"] = max_diff;
            report["relative_error_m_norm"] = errs;
            std::cout << "max nodal difference vs direct recombination: " << max_diff << "\n";
        }
    } else {
        u = direct;
    }
    if (!cfg.no_vtk)
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::vector<NodalField> fields{{"displacement", p.dofs.expand(u[i])}};
            if (!direct.empty() && p.modes) fields.emplace_back("direct", p.dofs.expand(direct[i]));
            write_vtk(ctx.out("dynamic_" + std::to_string(i) + ".vtk"), p.mesh, fields);
        }
    json params = solve_params(cfg, p);
    params["times"] = times;
    ctx.write_json("dynamic.json", report, params);
    std::cout << "dynamic response at " << times.size() << " times written to " << cfg.out_dir << "\n";
    return kOk;
}

// ---------------------------------------------------------------- box

int cmd_box(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto n = parse_triple<int>(cfg.cells, "--cells");
    const auto l = parse_triple<double>(cfg.size, "--size");
    DirichletPlanes planes;
    try {
        planes = DirichletPlanes::parse(cfg.dirichlet);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const Mesh mesh = generate_box(n[0], n[1], n[2], l[0], l[1], l[2], planes);
    std::ofstream f(cfg.out, std::ios::trunc);
    f << mesh.canonical_json() << "\n";
    if (!f) throw std::runtime_error("cannot write " + cfg.out);
    std::cout << "wrote " << cfg.out << ": " << mesh.num_nodes() << " nodes, " << mesh.num_tets() << " tets\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    Config cfg;
    CLI::App app{"Elastic eigenmodes of anisotropic heterogeneous bodies and modal synthesis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ELASTOMODES_VERSION);

    const auto mesh_opts = [&](CLI::App* c) {
        c->add_option("--mesh", cfg.mesh, "mesh file (.json or Gmsh ASCII .msh)")->required()->check(CLI::ExistingFile);
        c->add_option("--dir-tags", cfg.dir_tags, "comma-separated Dirichlet physical tags (.msh)");
        c->add_option("--neu-tags", cfg.neu_tags, "comma-separated Neumann physical tags (.msh)");
        c->add_option("--material", cfg.material, "material JSON")->required()->check(CLI::ExistingFile);
        c->add_option("--out-dir", cfg.out_dir, "output directory")->capture_default_str();
        c->add_option("--tol-cg", cfg.tol_cg, "relative CG residual tolerance")->capture_default_str();
        c->add_option("--tol-eig", cfg.tol_eig, "relative eigen residual tolerance")->capture_default_str();
        c->add_flag("--no-vtk", cfg.no_vtk, "skip VTK output");
    };
    const auto solution_opts = [&](CLI::App* c) {
        mesh_opts(c);
        c->add_option("--modes-file", cfg.modes_file, "mode container from the modes command")
            ->check(CLI::ExistingFile);
        c->add_flag("--direct", cfg.direct, "solve directly instead of by modal synthesis");
        c->add_flag("--compare-direct", cfg.compare_direct, "also solve directly and report the difference");
        c->add_option("--num-modes", cfg.num_modes, "retain only the first N stored modes")
            ->check(CLI::PositiveNumber);
    };

    auto* validate = app.add_subcommand("validate", "check mesh invariants and material hypotheses");
    mesh_opts(validate);

    auto* modes = app.add_subcommand("modes", "compute the smallest eigenmodes");
    mesh_opts(modes);
    modes->add_option("--num-modes", cfg.num_modes, "number of modes (default 10)")->check(CLI::PositiveNumber);
    modes->add_option("--shift", cfg.shift, "shift sigma of the shift-invert map (rad^2/s^2)");
    modes->add_flag("--json-modes", cfg.json_modes, "also write the JSON-only mode export");

    auto* stat = app.add_subcommand("static", "static response");
    solution_opts(stat);
    stat->add_option("--sources", cfg.sources, "source JSON")->check(CLI::ExistingFile);

    auto* harm = app.add_subcommand("harmonic", "time-harmonic response");
    solution_opts(harm);
    harm->add_option("--sources", cfg.sources, "source JSON (amplitudes)")->check(CLI::ExistingFile);
    harm->add_option("--omega", cfg.omegas, "angular frequency (rad/s), repeatable");
    harm->add_option("--guard", cfg.guard, "relative resonance guard")->capture_default_str();

    auto* dyn = app.add_subcommand("dynamic", "time-domain response of a finite spectrum");
    solution_opts(dyn);
    dyn->add_option("--spectrum", cfg.spectrum, "spectrum JSON")->check(CLI::ExistingFile);
    dyn->add_option("--times", cfg.times, "t0:t1:n or a comma-separated list");
    dyn->add_option("--guard", cfg.guard, "relative resonance guard")->capture_default_str();

    auto* box = app.add_subcommand("box", "write a structured box mesh");
    box->add_option("--cells", cfg.cells, "cells per axis nx,ny,nz")->capture_default_str();
    box->add_option("--size", cfg.size, "edge lengths lx,ly,lz")->capture_default_str();
    box->add_option("--dirichlet", cfg.dirichlet, "clamped planes, e.g. x0 or x0,z1")->capture_default_str();
    box->add_option("--out", cfg.out, "output mesh JSON")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    Context ctx{cfg, app.get_subcommands().front()->get_name()};
    try {
        if (*validate) return cmd_validate(ctx);
        if (*modes) return cmd_modes(ctx);
        if (*stat) return cmd_static(ctx);
        if (*harm) return cmd_harmonic(ctx);
        if (*dyn) return cmd_dynamic(ctx);
        if (*box) return cmd_box(ctx);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ResonanceError& e) {
        std::cerr << "resonance: " << e.what() << "\n";
        return kResonance;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolver;
    } catch (const MeshError& e) {
        std::cerr << "invalid mesh: " << e.what() << "\n";
        return e.kind() == MeshError::Kind::Io ? kUsage : kMesh;
    } catch (const Error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
