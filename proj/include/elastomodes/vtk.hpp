#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "elastomodes/mesh.hpp"

namespace elastomodes {

/// Named nodal vector field, 3 * num_nodes entries (x, y, z per node).
using NodalField = std::pair<std::string, Eigen::VectorXd>;

/// Legacy ASCII VTK (DataFile Version 3.0) unstructured grid of the tets
/// with POINT_DATA vector fields.
std::string vtk_text(const Mesh& mesh, const std::vector<NodalField>& fields, const std::string& title = "elastomodes");
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<NodalField>& fields,
               const std::string& title = "elastomodes");

} // namespace elastomodes
