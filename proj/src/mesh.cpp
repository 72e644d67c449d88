#include "elastomodes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "elastomodes/hash.hpp"

namespace elastomodes {

namespace {

using FaceKey = std::array<int, 3>;

FaceKey sorted_face(int a, int b, int c)
{
    FaceKey k{a, b, c};
    std::sort(k.begin(), k.end());
    return k;
}

// Faces of tet (n0,n1,n2,n3), each listed with the opposite local vertex.
constexpr int kTetFaces[4][4] = {{1, 2, 3, 0}, {0, 2, 3, 1}, {0, 1, 3, 2}, {0, 1, 2, 3}};

std::string face_name(const FaceKey& k)
{
    return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) + ")";
}

struct FaceUse {
    int count = 0;
    int owner = -1;
};

std::map<FaceKey, FaceUse> face_table(const std::vector<Tet>& tets)
{
    std::map<FaceKey, FaceUse> table;
    for (std::size_t t = 0; t < tets.size(); ++t) {
        const auto& n = tets[t].nodes;
        for (const auto& f : kTetFaces) {
            auto& use = table[sorted_face(n[f[0]], n[f[1]], n[f[2]])];
            if (use.count++ == 0) use.owner = static_cast<int>(t);
        }
    }
    return table;
}

} // namespace

double signed_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                     const Eigen::Vector3d& d)
{
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

Mesh::Mesh(std::vector<Eigen::Vector3d> nodes, std::vector<Tet> tets, std::vector<Facet> facets)
    : nodes_(std::move(nodes)), tets_(std::move(tets)), facets_(std::move(facets))
{
    using K = MeshError::Kind;
    const int n_nodes = static_cast<int>(nodes_.size());
    if (tets_.empty()) throw MeshError(K::Schema, "mesh has no tetrahedra");

    double extent = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!nodes_[i].allFinite()) throw MeshError(K::Schema, "node " + std::to_string(i) + " is not finite");
        extent = std::max(extent, (nodes_[i] - nodes_[0]).norm());
    }

    std::vector<bool> used(nodes_.size(), false);
    for (std::size_t t = 0; t < tets_.size(); ++t) {
        const auto& n = tets_[t].nodes;
        for (int i = 0; i < 4; ++i) {
            if (n[i] < 0 || n[i] >= n_nodes)
                throw MeshError(K::Schema, "tet " + std::to_string(t) + " references missing node " +
                                               std::to_string(n[i]));
            for (int j = 0; j < i; ++j)
                if (n[i] == n[j]) throw MeshError(K::Degenerate, "tet " + std::to_string(t) + " repeats a node");
            used[n[i]] = true;
        }
        const double v = signed_volume(nodes_[n[0]], nodes_[n[1]], nodes_[n[2]], nodes_[n[3]]);
        if (v < 0.0) throw MeshError(K::Orientation, "tet " + std::to_string(t) + " has negative volume " +
                                                         std::to_string(v));
        if (!(v > 1e-14 * extent * extent * extent))
            throw MeshError(K::Degenerate, "tet " + std::to_string(t) + " has zero volume");
    }
    for (std::size_t i = 0; i < used.size(); ++i)
        if (!used[i]) throw MeshError(K::Schema, "node " + std::to_string(i) + " is not used by any tet");

    auto table = face_table(tets_);
    std::map<FaceKey, int> tagged;
    owners_.resize(facets_.size());
    bool has_dirichlet = false;
    for (std::size_t f = 0; f < facets_.size(); ++f) {
        const auto& n = facets_[f].nodes;
        for (int v : n)
            if (v < 0 || v >= n_nodes)
                throw MeshError(K::Schema, "facet " + std::to_string(f) + " references missing node " +
                                               std::to_string(v));
        const FaceKey key = sorted_face(n[0], n[1], n[2]);
        auto it = table.find(key);
        if (it == table.end())
            throw MeshError(K::Partition, "facet " + std::to_string(f) + " " + face_name(key) +
                                              " is not a face of any tet");
        if (it->second.count > 2)
            throw MeshError(K::Schema, "face " + face_name(key) + " is shared by more than two tets");
        if (it->second.count != 1)
            throw MeshError(K::Partition, "facet " + std::to_string(f) + " " + face_name(key) +
                                              " is an interior face");
        if (!tagged.emplace(key, static_cast<int>(f)).second)
            throw MeshError(K::Partition, "boundary face " + face_name(key) + " is tagged more than once");
        const Eigen::Vector3d a = nodes_[n[0]], b = nodes_[n[1]], c = nodes_[n[2]];
        if (!((b - a).cross(c - a).norm() > 1e-14 * extent * extent))
            throw MeshError(K::Degenerate, "facet " + std::to_string(f) + " is degenerate");
        owners_[f] = it->second.owner;
        has_dirichlet = has_dirichlet || facets_[f].kind == BoundaryKind::Dirichlet;
    }
    for (const auto& [key, use] : table) {
        if (use.count > 2) throw MeshError(K::Schema, "face " + face_name(key) + " is shared by more than two tets");
        if (use.count == 1 && !tagged.contains(key))
            throw MeshError(K::Partition, "boundary face " + face_name(key) + " of tet " + std::to_string(use.owner) +
                                              " is untagged");
    }
    if (!has_dirichlet) throw MeshError(K::EmptyDirichlet, "mesh has no Dirichlet facet");
}

double Mesh::tet_volume(std::size_t t) const
{
    const auto& n = tets_.at(t).nodes;
    return signed_volume(nodes_[n[0]], nodes_[n[1]], nodes_[n[2]], nodes_[n[3]]);
}

std::vector<int> Mesh::element_regions() const
{
    std::vector<int> r;
    r.reserve(tets_.size());
    for (const auto& t : tets_) r.push_back(t.region);
    return r;
}

std::vector<bool> Mesh::dirichlet_nodes() const
{
    std::vector<bool> on(nodes_.size(), false);
    for (const auto& f : facets_)
        if (f.kind == BoundaryKind::Dirichlet)
            for (int v : f.nodes) on[v] = true;
    return on;
}

std::string Mesh::canonical_json() const
{
    nlohmann::json j;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (const auto& x : nodes_) nodes.push_back({x.x(), x.y(), x.z()});
    auto& tets = j["tets"] = nlohmann::json::array();
    for (const auto& t : tets_) tets.push_back({t.nodes[0], t.nodes[1], t.nodes[2], t.nodes[3], t.region});
    auto& facets = j["facets"] = nlohmann::json::array();
    for (const auto& f : facets_)
        facets.push_back({f.nodes[0], f.nodes[1], f.nodes[2], f.kind == BoundaryKind::Dirichlet ? "dir" : "neu"});
    return j.dump();
}

std::string Mesh::fingerprint() const
{
    return sha256_hex(canonical_json());
}

FacetGeometry facet_geometry(const Mesh& mesh, std::size_t facet_id)
{
    const auto& f = mesh.facets().at(facet_id);
    const auto& x = mesh.nodes();
    const Eigen::Vector3d a = x[f.nodes[0]], b = x[f.nodes[1]], c = x[f.nodes[2]];
    Eigen::Vector3d n = (b - a).cross(c - a);
    const double twice_area = n.norm();
    n /= twice_area;

    // Orient away from the vertex of the owning tet that is not on the facet.
    const auto& tet = mesh.tets()[mesh.facet_owner(facet_id)].nodes;
    for (int v : tet) {
        if (v == f.nodes[0] || v == f.nodes[1] || v == f.nodes[2]) continue;
        if (n.dot(x[v] - a) > 0.0) n = -n;
        break;
    }
    return {0.5 * twice_area, n};
}

DirichletPlanes DirichletPlanes::parse(const std::string& text)
{
    DirichletPlanes p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "x0") p.x_min = true;
        else if (item == "x1") p.x_max = true;
        else if (item == "y0") p.y_min = true;
        else if (item == "y1") p.y_max = true;
        else if (item == "z0") p.z_min = true;
        else if (item == "z1") p.z_max = true;
        else throw MeshError(MeshError::Kind::Schema, "unknown box plane \"" + item + "\" (use x0,x1,y0,y1,z0,z1)");
    }
    return p;
}

Mesh generate_box(int nx, int ny, int nz, double lx, double ly, double lz, const DirichletPlanes& dirichlet)
{
    using K = MeshError::Kind;
    if (nx < 1 || ny < 1 || nz < 1) throw MeshError(K::Schema, "box cell counts must be >= 1");
    if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0)) throw MeshError(K::Schema, "box lengths must be positive");
    if (!dirichlet.any()) throw MeshError(K::EmptyDirichlet, "box Dirichlet selection is empty");

    const auto id = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
    std::vector<Eigen::Vector3d> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) nodes.emplace_back(lx * i / nx, ly * j / ny, lz * k / nz);

    // Kuhn subdivision: every tet runs along the cell diagonal (0,0,0)->(1,1,1).
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    static constexpr bool odd[6] = {false, true, true, false, false, true};
    std::vector<Tet> tets;
    tets.reserve(static_cast<std::size_t>(6) * nx * ny * nz);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (int p = 0; p < 6; ++p) {
                    std::array<int, 3> c{i, j, k};
                    std::array<int, 4> v{};
                    v[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[perms[p][s]];
                        v[s + 1] = id(c[0], c[1], c[2]);
                    }
                    if (odd[p]) std::swap(v[0], v[1]);
                    tets.push_back({v, 1});
                }

    const auto on_plane = [&](const std::array<int, 3>& f, int axis, int index) {
        return std::all_of(f.begin(), f.end(), [&](int n) {
            const int ijk[3] = {n % (nx + 1), (n / (nx + 1)) % (ny + 1), n / ((nx + 1) * (ny + 1))};
            return ijk[axis] == index;
        });
    };
    auto table = face_table(tets);
    std::vector<Facet> facets;
    for (const auto& t : tets)
        for (const auto& lf : kTetFaces) {
            std::array<int, 3> f{t.nodes[lf[0]], t.nodes[lf[1]], t.nodes[lf[2]]};
            if (table.at(sorted_face(f[0], f[1], f[2])).count != 1) continue;
            const bool dir = (dirichlet.x_min && on_plane(f, 0, 0)) || (dirichlet.x_max && on_plane(f, 0, nx)) ||
                             (dirichlet.y_min && on_plane(f, 1, 0)) || (dirichlet.y_max && on_plane(f, 1, ny)) ||
                             (dirichlet.z_min && on_plane(f, 2, 0)) || (dirichlet.z_max && on_plane(f, 2, nz));
            facets.push_back({f, dir ? BoundaryKind::Dirichlet : BoundaryKind::Neumann});
        }
    return Mesh(std::move(nodes), std::move(tets), std::move(facets));
}

Mesh parse_mesh_json(const std::string& text)
{
    using K = MeshError::Kind;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw MeshError(K::Schema, std::string("mesh file is not valid JSON: ") + e.what());
    }
    std::vector<Eigen::Vector3d> nodes;
    std::vector<Tet> tets;
    std::vector<Facet> facets;
    try {
        for (const auto& n : j.at("nodes")) {
            if (n.size() != 3) throw MeshError(K::Schema, "node entries must be [x,y,z]");
            nodes.emplace_back(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
        }
        for (const auto& t : j.at("tets")) {
            if (t.size() != 5 && t.size() != 4) throw MeshError(K::Schema, "tet entries must be [a,b,c,d,region]");
            tets.push_back({{t[0].get<int>(), t[1].get<int>(), t[2].get<int>(), t[3].get<int>()},
                            t.size() == 5 ? t[4].get<int>() : 1});
        }
        for (const auto& f : j.at("facets")) {
            if (f.size() != 4) throw MeshError(K::Schema, "facet entries must be [a,b,c,\"dir\"|\"neu\"]");
            const auto tag = f[3].get<std::string>();
            if (tag != "dir" && tag != "neu") throw MeshError(K::Schema, "facet tag must be \"dir\" or \"neu\"");
            facets.push_back({{f[0].get<int>(), f[1].get<int>(), f[2].get<int>()},
                              tag == "dir" ? BoundaryKind::Dirichlet : BoundaryKind::Neumann});
        }
    } catch (const nlohmann::json::exception& e) {
        throw MeshError(K::Schema, std::string("mesh schema error: ") + e.what());
    }
    return Mesh(std::move(nodes), std::move(tets), std::move(facets));
}

Mesh load_mesh_json(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw MeshError(MeshError::Kind::Io, e.what());
    }
    return parse_mesh_json(text);
}

Mesh parse_gmsh_msh2(const std::string& text, const std::set<int>& dirichlet_tags, const std::set<int>& neumann_tags)
{
    using K = MeshError::Kind;
    for (int t : dirichlet_tags)
        if (neumann_tags.contains(t))
            throw MeshError(K::Schema, "physical tag " + std::to_string(t) + " listed as both Dirichlet and Neumann");

    std::istringstream in(text);
    std::string line;
    bool have_format = false, have_nodes = false, have_elements = false;
    std::map<long, Eigen::Vector3d> raw_nodes;
    struct RawTet {
        std::array<long, 4> n;
        int region;
    };
    struct RawTri {
        std::array<long, 3> n;
        int tag;
    };
    std::vector<RawTet> raw_tets;
    std::vector<RawTri> raw_tris;

    const auto next_line = [&](const char* section) {
        if (!std::getline(in, line)) throw MeshError(K::Schema, std::string("unexpected end of file in ") + section);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return std::istringstream(line);
    };

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "$MeshFormat") {
            auto ls = next_line("$MeshFormat");
            std::string version;
            int file_type = -1;
            ls >> version >> file_type;
            if (version.rfind("2.", 0) != 0 || file_type != 0)
                throw MeshError(K::Unsupported, "only ASCII MSH 2.2 is supported (found version " + version +
                                                    ", file type " + std::to_string(file_type) + ")");
            next_line("$MeshFormat");
            have_format = true;
        } else if (line == "$Nodes") {
            long count = 0;
            next_line("$Nodes") >> count;
            for (long i = 0; i < count; ++i) {
                auto ls = next_line("$Nodes");
                long id;
                double x, y, z;
                if (!(ls >> id >> x >> y >> z)) throw MeshError(K::Schema, "malformed node line: " + line);
                raw_nodes[id] = Eigen::Vector3d(x, y, z);
            }
            next_line("$Nodes");
            have_nodes = true;
        } else if (line == "$Elements") {
            long count = 0;
            next_line("$Elements") >> count;
            for (long i = 0; i < count; ++i) {
                auto ls = next_line("$Elements");
                long id;
                int type, ntags;
                if (!(ls >> id >> type >> ntags)) throw MeshError(K::Schema, "malformed element line: " + line);
                std::vector<int> tags(ntags);
                for (auto& t : tags) ls >> t;
                const int tag = ntags > 0 ? tags[0] : 0;
                if (type == 4) {
                    RawTet t{{}, tag};
                    for (auto& n : t.n) ls >> n;
                    if (!ls) throw MeshError(K::Schema, "malformed tet element " + std::to_string(id));
                    raw_tets.push_back(t);
                } else if (type == 2) {
                    RawTri t{{}, tag};
                    for (auto& n : t.n) ls >> n;
                    if (!ls) throw MeshError(K::Schema, "malformed triangle element " + std::to_string(id));
                    raw_tris.push_back(t);
                } else {
                    throw MeshError(K::Unsupported, "unsupported element type " + std::to_string(type) +
                                                        " (element " + std::to_string(id) +
                                                        "); only 4-node tets and 3-node triangles are accepted");
                }
            }
            next_line("$Elements");
            have_elements = true;
        } else if (line.front() == '$' && line.rfind("$End", 0) != 0) {
            const std::string end = "$End" + line.substr(1);
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line == end) break;
            }
        }
    }
    if (!have_format || !have_nodes || !have_elements)
        throw MeshError(K::Schema, "MSH file lacks $MeshFormat, $Nodes or $Elements");

    // Compact to nodes referenced by tets, keeping ascending id order.
    std::map<long, int> index;
    for (const auto& t : raw_tets)
        for (long id : t.n) {
            if (!raw_nodes.contains(id))
                throw MeshError(K::Schema, "element references unknown node " + std::to_string(id));
            index.emplace(id, 0);
        }
    std::vector<Eigen::Vector3d> nodes;
    for (auto& [id, pos] : index) {
        pos = static_cast<int>(nodes.size());
        nodes.push_back(raw_nodes.at(id));
    }
    std::vector<Tet> tets;
    for (const auto& t : raw_tets)
        tets.push_back({{index.at(t.n[0]), index.at(t.n[1]), index.at(t.n[2]), index.at(t.n[3])}, t.region});
    std::vector<Facet> facets;
    std::set<int> stray;
    for (const auto& t : raw_tris) {
        BoundaryKind kind;
        if (dirichlet_tags.contains(t.tag))
            kind = BoundaryKind::Dirichlet;
        else if (neumann_tags.contains(t.tag))
            kind = BoundaryKind::Neumann;
        else {
            stray.insert(t.tag);
            continue;
        }
        std::array<int, 3> f{};
        for (int i = 0; i < 3; ++i) {
            auto it = index.find(t.n[i]);
            if (it == index.end())
                throw MeshError(K::Partition, "triangle node " + std::to_string(t.n[i]) + " is not on any tet");
            f[i] = it->second;
        }
        facets.push_back({f, kind});
    }
    if (!stray.empty()) {
        std::string list;
        for (int t : stray) list += (list.empty() ? "" : ",") + std::to_string(t);
        throw MeshError(K::Partition, "triangle physical tag(s) " + list + " in neither the Dirichlet nor Neumann set");
    }
    return Mesh(std::move(nodes), std::move(tets), std::move(facets));
}

Mesh load_gmsh_msh2(const std::filesystem::path& path, const std::set<int>& dirichlet_tags,
                    const std::set<int>& neumann_tags)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw MeshError(MeshError::Kind::Io, e.what());
    }
    return parse_gmsh_msh2(text, dirichlet_tags, neumann_tags);
}

} // namespace elastomodes
