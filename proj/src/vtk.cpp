#include "elastomodes/vtk.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "elastomodes/errors.hpp"

namespace elastomodes {

std::string vtk_text(const Mesh& mesh, const std::vector<NodalField>& fields, const std::string& title)
{
    std::ostringstream out;
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_nodes() << " double\n";
    for (const auto& x : mesh.nodes()) out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
    out << "CELLS " << mesh.num_tets() << ' ' << 5 * mesh.num_tets() << '\n';
    for (const auto& t : mesh.tets())
        out << "4 " << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << ' ' << t.nodes[3] << '\n';
    out << "CELL_TYPES " << mesh.num_tets() << '\n';
    for (std::size_t i = 0; i < mesh.num_tets(); ++i) out << "10\n";
    if (!fields.empty()) out << "POINT_DATA " << mesh.num_nodes() << '\n';
    for (const auto& [name, values] : fields) {
        if (values.size() != static_cast<Eigen::Index>(3 * mesh.num_nodes()))
            throw Error("VTK field " + name + " has the wrong length");
        out << "VECTORS " << name << " double\n";
        for (std::size_t n = 0; n < mesh.num_nodes(); ++n)
            out << values(3 * n) << ' ' << values(3 * n + 1) << ' ' << values(3 * n + 2) << '\n';
    }
    return out.str();
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<NodalField>& fields,
               const std::string& title)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f << vtk_text(mesh, fields, title);
}

} // namespace elastomodes
