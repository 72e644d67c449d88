#include "elastomodes/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "elastomodes/hash.hpp"

namespace elastomodes {

DofMap::DofMap(const Mesh& mesh)
{
    const auto on_dirichlet = mesh.dirichlet_nodes();
    ids_.resize(mesh.num_nodes());
    for (std::size_t n = 0; n < ids_.size(); ++n) {
        if (on_dirichlet[n]) {
            ids_[n] = {kConstrained, kConstrained, kConstrained};
        } else {
            ids_[n] = {n_free_, n_free_ + 1, n_free_ + 2};
            n_free_ += 3;
        }
    }
}

std::size_t DofMap::num_constrained_nodes() const
{
    return static_cast<std::size_t>(std::count_if(ids_.begin(), ids_.end(),
                                                  [](const auto& d) { return d[0] == kConstrained; }));
}

Eigen::Matrix<double, 6, 12> strain_displacement(const Mesh& mesh, std::size_t tet)
{
    const auto& n = mesh.tets()[tet].nodes;
    const auto& x = mesh.nodes();
    Eigen::Matrix3d jac;
    jac.col(0) = x[n[1]] - x[n[0]];
    jac.col(1) = x[n[2]] - x[n[0]];
    jac.col(2) = x[n[3]] - x[n[0]];
    const Eigen::Matrix3d inv = jac.inverse();
    if (!inv.allFinite()) throw AssemblyError("degenerate Jacobian in tet " + std::to_string(tet));

    Eigen::Matrix<double, 3, 4> grad;
    grad.rightCols<3>() = inv.transpose();
    grad.col(0) = -grad.rightCols<3>().rowwise().sum();

    Eigen::Matrix<double, 6, 12> b = Eigen::Matrix<double, 6, 12>::Zero();
    for (int a = 0; a < 4; ++a) {
        const double dx = grad(0, a), dy = grad(1, a), dz = grad(2, a);
        const int c = 3 * a;
        b(0, c) = dx;
        b(1, c + 1) = dy;
        b(2, c + 2) = dz;
        b(3, c + 1) = dz;
        b(3, c + 2) = dy;
        b(4, c) = dz;
        b(4, c + 2) = dx;
        b(5, c) = dy;
        b(5, c + 1) = dx;
    }
    return b;
}

namespace {

void check_sizes(const Mesh& mesh, const MaterialField& material)
{
    if (material.tensors.size() != mesh.num_tets() || material.densities.size() != mesh.num_tets())
        throw AssemblyError("material field has " + std::to_string(material.tensors.size()) + " entries for " +
                            std::to_string(mesh.num_tets()) + " elements");
}

std::array<int, 12> element_dofs(const Mesh& mesh, const DofMap& dofs, std::size_t tet)
{
    std::array<int, 12> d{};
    const auto& n = mesh.tets()[tet].nodes;
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c) d[3 * a + c] = dofs.dof(n[a], c);
    return d;
}

} // namespace

SymSparse assemble_stiffness(const Mesh& mesh, const MaterialField& material, const DofMap& dofs)
{
    check_sizes(mesh, material);
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(mesh.num_tets() * 144);
    for (std::size_t e = 0; e < mesh.num_tets(); ++e) {
        const auto b = strain_displacement(mesh, e);
        const Eigen::Matrix<double, 12, 12> ke = mesh.tet_volume(e) * (b.transpose() * material.tensors[e].voigt() * b);
        const auto d = element_dofs(mesh, dofs, e);
        for (int i = 0; i < 12; ++i) {
            if (d[i] == DofMap::kConstrained) continue;
            for (int j = 0; j < 12; ++j)
                if (d[j] != DofMap::kConstrained) triplets.emplace_back(d[i], d[j], ke(i, j));
        }
    }
    return SymSparse::from_triplets(dofs.num_free(), triplets);
}

SymSparse assemble_mass(const Mesh& mesh, const MaterialField& material, const DofMap& dofs)
{
    check_sizes(mesh, material);
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(mesh.num_tets() * 48);
    for (std::size_t e = 0; e < mesh.num_tets(); ++e) {
        const double w = material.densities[e] * mesh.tet_volume(e) / 20.0;
        const auto d = element_dofs(mesh, dofs, e);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const double m = (a == b ? 2.0 : 1.0) * w;
                for (int c = 0; c < 3; ++c) {
                    const int i = d[3 * a + c], j = d[3 * b + c];
                    if (i != DofMap::kConstrained && j != DofMap::kConstrained) triplets.emplace_back(i, j, m);
                }
            }
    }
    return SymSparse::from_triplets(dofs.num_free(), triplets);
}

LoadVector assemble_body_load(const Mesh& mesh, const DofMap& dofs, std::span<const Eigen::Vector3d> per_element)
{
    if (per_element.size() != mesh.num_tets())
        throw AssemblyError("body force has " + std::to_string(per_element.size()) + " entries for " +
                            std::to_string(mesh.num_tets()) + " elements");
    LoadVector f = LoadVector::Zero(dofs.num_free());
    for (std::size_t e = 0; e < mesh.num_tets(); ++e) {
        if (!per_element[e].allFinite()) throw AssemblyError("non-finite body force on element " + std::to_string(e));
        const Eigen::Vector3d share = per_element[e] * (mesh.tet_volume(e) / 4.0);
        for (int n : mesh.tets()[e].nodes)
            for (int c = 0; c < 3; ++c)
                if (int d = dofs.dof(n, c); d != DofMap::kConstrained) f(d) += share(c);
    }
    return f;
}

LoadVector assemble_body_load(const Mesh& mesh, const DofMap& dofs, const Eigen::Vector3d& f)
{
    const std::vector<Eigen::Vector3d> per_element(mesh.num_tets(), f);
    return assemble_body_load(mesh, dofs, per_element);
}

LoadVector assemble_traction_load(const Mesh& mesh, const DofMap& dofs,
                                  const std::map<std::size_t, Eigen::Vector3d>& per_facet)
{
    LoadVector f = LoadVector::Zero(dofs.num_free());
    for (const auto& [id, g] : per_facet) {
        if (id >= mesh.num_facets()) throw AssemblyError("traction on unknown facet " + std::to_string(id));
        const auto& facet = mesh.facets()[id];
        if (facet.kind == BoundaryKind::Dirichlet)
            throw AssemblyError("traction specified on Dirichlet facet " + std::to_string(id));
        if (!g.allFinite()) throw AssemblyError("non-finite traction on facet " + std::to_string(id));
        const Eigen::Vector3d share = g * (facet_geometry(mesh, id).area / 3.0);
        for (int n : facet.nodes)
            for (int c = 0; c < 3; ++c)
                if (int d = dofs.dof(n, c); d != DofMap::kConstrained) f(d) += share(c);
    }
    return f;
}

LoadVector assemble_traction_load(const Mesh& mesh, const DofMap& dofs, const Eigen::Vector3d& g)
{
    std::map<std::size_t, Eigen::Vector3d> per_facet;
    for (std::size_t i = 0; i < mesh.num_facets(); ++i)
        if (mesh.facets()[i].kind == BoundaryKind::Neumann) per_facet.emplace(i, g);
    return assemble_traction_load(mesh, dofs, per_facet);
}

std::vector<std::size_t> select_facets(const Mesh& mesh, const std::string& selector)
{
    std::vector<std::size_t> out;
    if (selector == "neumann") {
        for (std::size_t i = 0; i < mesh.num_facets(); ++i)
            if (mesh.facets()[i].kind == BoundaryKind::Neumann) out.push_back(i);
        return out;
    }
    if (selector.rfind("facet:", 0) == 0) {
        try {
            out.push_back(std::stoul(selector.substr(6)));
        } catch (const std::exception&) {
            throw AssemblyError("bad facet selector \"" + selector + "\"");
        }
        if (out.back() >= mesh.num_facets()) throw AssemblyError("facet selector out of range: " + selector);
        return out;
    }
    if (selector.rfind("plane:", 0) == 0 && selector.size() > 8 && selector[7] == '=') {
        const int axis = selector[6] == 'x' ? 0 : selector[6] == 'y' ? 1 : selector[6] == 'z' ? 2 : -1;
        if (axis < 0) throw AssemblyError("bad plane selector \"" + selector + "\"");
        double value = 0.0;
        try {
            value = std::stod(selector.substr(8));
        } catch (const std::exception&) {
            throw AssemblyError("bad plane selector \"" + selector + "\"");
        }
        double extent = 0.0;
        for (const auto& x : mesh.nodes()) extent = std::max(extent, x.cwiseAbs().maxCoeff());
        const double tol = 1e-9 * std::max(extent, 1.0);
        for (std::size_t i = 0; i < mesh.num_facets(); ++i) {
            const auto& f = mesh.facets()[i].nodes;
            if (std::all_of(f.begin(), f.end(),
                            [&](int n) { return std::abs(mesh.nodes()[n](axis) - value) <= tol; }))
                out.push_back(i);
        }
        return out;
    }
    throw AssemblyError("unknown facet selector \"" + selector + "\"");
}

std::map<std::size_t, Eigen::Vector3d> resolve_tractions(
    const Mesh& mesh, const std::vector<std::pair<std::string, Eigen::Vector3d>>& entries)
{
    std::map<std::size_t, Eigen::Vector3d> per_facet;
    for (const auto& [selector, g] : entries)
        for (std::size_t id : select_facets(mesh, selector)) {
            auto [it, inserted] = per_facet.emplace(id, g);
            if (!inserted) it->second += g;
        }
    return per_facet;
}

LoadVector SourceSpec::body_load(const Mesh& mesh, const DofMap& dofs) const
{
    if (!body_per_element.empty()) return assemble_body_load(mesh, dofs, body_per_element);
    if (body_force) return assemble_body_load(mesh, dofs, *body_force);
    return LoadVector::Zero(dofs.num_free());
}

LoadVector SourceSpec::traction_load(const Mesh& mesh, const DofMap& dofs) const
{
    return assemble_traction_load(mesh, dofs, resolve_tractions(mesh, traction));
}

namespace {

Eigen::Vector3d vec3(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 3) throw AssemblyError(where + ": expected [x,y,z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

SourceSpec parse_source_json(const std::string& text)
{
    SourceSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("body_force")) {
            const auto& b = j["body_force"];
            if (b.is_object()) {
                for (const auto& v : b.at("per_element")) spec.body_per_element.push_back(vec3(v, "body_force"));
            } else if (b.is_array() && !b.empty() && b[0].is_array()) {
                for (const auto& v : b) spec.body_per_element.push_back(vec3(v, "body_force"));
            } else {
                spec.body_force = vec3(b, "body_force");
            }
        }
        if (j.contains("traction"))
            for (const auto& [selector, g] : j["traction"].items())
                spec.traction.emplace_back(selector, vec3(g, "traction " + selector));
    } catch (const nlohmann::json::exception& e) {
        throw AssemblyError(std::string("source file error: ") + e.what());
    }
    return spec;
}

SourceSpec load_source_json(const std::filesystem::path& path)
{
    return parse_source_json(read_text_file(path));
}

} // namespace elastomodes
