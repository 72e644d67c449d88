#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elastomodes/material.hpp"
#include "elastomodes/mesh.hpp"
#include "elastomodes/sparse.hpp"

namespace elastomodes {

/// Numbering of the free displacement components. Nodes on a Dirichlet
/// facet carry no free dofs; the remaining ones are numbered node-major,
/// component-minor, contiguously from 0.
class DofMap {
public:
    static constexpr int kConstrained = -1;

    explicit DofMap(const Mesh& mesh);

    int num_free() const noexcept { return n_free_; }
    std::size_t num_nodes() const noexcept { return ids_.size(); }
    int dof(std::size_t node, int component) const { return ids_[node][component]; }
    bool constrained(std::size_t node) const { return ids_[node][0] == kConstrained; }
    std::size_t num_constrained_nodes() const;

    /// Free-dof vector to a 3 * num_nodes nodal vector, zero on constrained dofs.
    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> expand(const Eigen::MatrixBase<Derived>& free) const
    {
        Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out =
            Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>::Zero(3 * ids_.size());
        for (std::size_t n = 0; n < ids_.size(); ++n)
            for (int c = 0; c < 3; ++c)
                if (ids_[n][c] != kConstrained) out(3 * n + c) = free(ids_[n][c]);
        return out;
    }

private:
    std::vector<std::array<int, 3>> ids_;
    int n_free_ = 0;
};

inline DofMap build_dofmap(const Mesh& mesh) { return DofMap(mesh); }

/// Constant strain-displacement matrix of a linear tet, engineering shear
/// rows in Voigt order; columns are (ux,uy,uz) of local nodes 0..3.
Eigen::Matrix<double, 6, 12> strain_displacement(const Mesh& mesh, std::size_t tet);

/// Sum over elements of V_e B_e^T C_e B_e restricted to free dofs.
SymSparse assemble_stiffness(const Mesh& mesh, const MaterialField& material, const DofMap& dofs);

/// Consistent P1 mass: rho_e V_e (1 + delta_ab) / 20 per component.
SymSparse assemble_mass(const Mesh& mesh, const MaterialField& material, const DofMap& dofs);

using LoadVector = Eigen::VectorXd;

LoadVector assemble_body_load(const Mesh& mesh, const DofMap& dofs, const Eigen::Vector3d& f);
LoadVector assemble_body_load(const Mesh& mesh, const DofMap& dofs, std::span<const Eigen::Vector3d> per_element);

/// Tractions keyed by facet id; a Dirichlet facet is rejected.
LoadVector assemble_traction_load(const Mesh& mesh, const DofMap& dofs,
                                  const std::map<std::size_t, Eigen::Vector3d>& per_facet);
/// Same traction on every Neumann facet.
LoadVector assemble_traction_load(const Mesh& mesh, const DofMap& dofs, const Eigen::Vector3d& g);

/// Facet selectors: "neumann" (every Neumann facet), "facet:<id>", and
/// "plane:<x|y|z>=<value>" (facets lying in that coordinate plane).
std::vector<std::size_t> select_facets(const Mesh& mesh, const std::string& selector);

/// Piecewise-constant static sources as read from a source file.
struct SourceSpec {
    std::optional<Eigen::Vector3d> body_force;
    std::vector<Eigen::Vector3d> body_per_element;
    std::vector<std::pair<std::string, Eigen::Vector3d>> traction;

    LoadVector body_load(const Mesh& mesh, const DofMap& dofs) const;
    LoadVector traction_load(const Mesh& mesh, const DofMap& dofs) const;
};

std::map<std::size_t, Eigen::Vector3d> resolve_tractions(
    const Mesh& mesh, const std::vector<std::pair<std::string, Eigen::Vector3d>>& entries);

SourceSpec parse_source_json(const std::string& text);
SourceSpec load_source_json(const std::filesystem::path& path);

} // namespace elastomodes
