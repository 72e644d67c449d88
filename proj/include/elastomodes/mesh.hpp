#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "elastomodes/errors.hpp"

namespace elastomodes {

enum class BoundaryKind { Dirichlet, Neumann };

struct Tet {
    std::array<int, 4> nodes;
    int region = 1;
};

struct Facet {
    std::array<int, 3> nodes;
    BoundaryKind kind = BoundaryKind::Neumann;
};

struct FacetGeometry {
    double area;
    Eigen::Vector3d normal; ///< unit, pointing out of the owning tet
};

/// Linear tetrahedral mesh with a Dirichlet/Neumann partition of its
/// boundary. Instances are validated on construction and immutable after.
///
/// Invariants: positive tet volumes; every facet is a boundary face of the
/// tet complex; every boundary face is tagged exactly once; at least one
/// Dirichlet facet.
class Mesh {
public:
    Mesh(std::vector<Eigen::Vector3d> nodes, std::vector<Tet> tets, std::vector<Facet> facets);

    const std::vector<Eigen::Vector3d>& nodes() const noexcept { return nodes_; }
    const std::vector<Tet>& tets() const noexcept { return tets_; }
    const std::vector<Facet>& facets() const noexcept { return facets_; }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_tets() const noexcept { return tets_.size(); }
    std::size_t num_facets() const noexcept { return facets_.size(); }

    /// Index of the tet that owns facet `f`.
    int facet_owner(std::size_t f) const { return owners_.at(f); }

    double tet_volume(std::size_t t) const;
    std::vector<int> element_regions() const;

    /// Nodes lying on at least one Dirichlet facet.
    std::vector<bool> dirichlet_nodes() const;

    /// Canonical JSON text; its hash identifies the mesh.
    std::string canonical_json() const;
    std::string fingerprint() const;

private:
    std::vector<Eigen::Vector3d> nodes_;
    std::vector<Tet> tets_;
    std::vector<Facet> facets_;
    std::vector<int> owners_;
};

double signed_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                     const Eigen::Vector3d& d);

FacetGeometry facet_geometry(const Mesh& mesh, std::size_t facet_id);

/// Selects the box faces that are clamped.
struct DirichletPlanes {
    bool x_min = false, x_max = false;
    bool y_min = false, y_max = false;
    bool z_min = false, z_max = false;

    bool any() const noexcept { return x_min || x_max || y_min || y_max || z_min || z_max; }
    /// Parses a comma list such as "x0,y1" (x0 = plane x = 0, x1 = plane x = lx).
    static DirichletPlanes parse(const std::string& text);
};

/// Structured box [0,lx]x[0,ly]x[0,lz] with six tets per cell, all in region 1.
Mesh generate_box(int nx, int ny, int nz, double lx, double ly, double lz, const DirichletPlanes& dirichlet);

Mesh load_mesh_json(const std::filesystem::path& path);
Mesh parse_mesh_json(const std::string& text);

/// ASCII Gmsh 2.2 reader: 4-node tets (type 4) and 3-node triangles (type 2)
/// only. Triangles are tagged by their physical tag.
Mesh load_gmsh_msh2(const std::filesystem::path& path, const std::set<int>& dirichlet_tags,
                    const std::set<int>& neumann_tags);
Mesh parse_gmsh_msh2(const std::string& text, const std::set<int>& dirichlet_tags, const std::set<int>& neumann_tags);

} // namespace elastomodes
