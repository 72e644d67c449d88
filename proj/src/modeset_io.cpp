#include "elastomodes/modeset_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "elastomodes/hash.hpp"

namespace elastomodes {

namespace {

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

double get_f64(const std::string& in, std::size_t pos) { return std::bit_cast<double>(get_u64(in, pos)); }

} // namespace

nlohmann::json modeset_header(const ModeSet& modes, const nlohmann::json& extra)
{
    nlohmann::json h;
    h["format"] = "elastomodes.modeset";
    h["version"] = 1;
    h["num_modes"] = modes.num_modes();
    h["num_dofs"] = modes.num_dofs();
    h["mesh_fingerprint"] = modes.mesh_fingerprint();
    h["tolerances"] = {{"eigen_residual", modes.eigen_tolerance()}};
    h["shift"] = modes.shift();
    h["scalar"] = "float64-le";
    if (!extra.empty()) h["extra"] = extra;
    return h;
}

std::string encode_modeset(const ModeSet& modes, const nlohmann::json& extra)
{
    const std::string header = modeset_header(modes, extra).dump();
    std::string out(kModeSetMagic, sizeof kModeSetMagic);
    put_u64(out, header.size());
    out += header;
    out.reserve(out.size() + 8 * (modes.num_modes() * (1 + modes.num_dofs())));
    for (Eigen::Index i = 0; i < modes.num_modes(); ++i) put_f64(out, modes.lambda(i));
    const auto& u = modes.modes();
    for (Eigen::Index c = 0; c < u.cols(); ++c)
        for (Eigen::Index r = 0; r < u.rows(); ++r) put_f64(out, u(r, c));
    return out;
}

ModeSet decode_modeset(const std::string& bytes, nlohmann::json* header_out)
{
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kModeSetMagic, 8) != 0)
        throw FormatError("not a mode container (bad magic)");
    const std::uint64_t hlen = get_u64(bytes, 8);
    if (hlen > bytes.size() - 16) throw FormatError("mode container header overruns file");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(16, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("mode container header is not JSON: ") + e.what());
    }
    if (h.value("format", "") != "elastomodes.modeset") throw FormatError("mode container has wrong format tag");
    const auto k = h.at("num_modes").get<Eigen::Index>();
    const auto n = h.at("num_dofs").get<Eigen::Index>();
    const std::size_t payload = 8 * static_cast<std::size_t>(k) * (1 + static_cast<std::size_t>(n));
    if (bytes.size() - 16 - hlen != payload) throw FormatError("mode container payload size mismatch");
    std::size_t pos = 16 + hlen;
    Eigen::VectorXd lambdas(k);
    for (Eigen::Index i = 0; i < k; ++i, pos += 8) lambdas(i) = get_f64(bytes, pos);
    Eigen::MatrixXd u(n, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < n; ++r, pos += 8) u(r, c) = get_f64(bytes, pos);
    if (header_out) *header_out = h;
    return ModeSet(std::move(lambdas), std::move(u), h.value("mesh_fingerprint", ""),
                   h.value("tolerances", nlohmann::json::object()).value("eigen_residual", 0.0), h.value("shift", 0.0));
}

void write_modeset(const std::filesystem::path& path, const ModeSet& modes, const nlohmann::json& extra)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    // a .json path gets the JSON-only export
    const std::string bytes =
        path.extension() == ".json" ? modeset_to_json(modes, extra).dump(1) + "\n" : encode_modeset(modes, extra);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + path.string());
}

ModeSet read_modeset(const std::filesystem::path& path, nlohmann::json* header)
{
    std::string bytes;
    try {
        bytes = read_text_file(path);
    } catch (const Error& e) {
        throw FormatError(e.what());
    }
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kModeSetMagic, 8) == 0) return decode_modeset(bytes, header);
    try {
        const auto j = nlohmann::json::parse(bytes);
        if (header) *header = j.at("header");
        return modeset_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("unrecognized mode file " + path.string() + ": " + e.what());
    }
}

nlohmann::json modeset_to_json(const ModeSet& modes, const nlohmann::json& extra)
{
    nlohmann::json j;
    j["header"] = modeset_header(modes, extra);
    j["lambdas"] = std::vector<double>(modes.lambdas().data(), modes.lambdas().data() + modes.num_modes());
    auto& cols = j["modes"] = nlohmann::json::array();
    for (Eigen::Index c = 0; c < modes.num_modes(); ++c) {
        const Eigen::VectorXd col = modes.mode(c);
        cols.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    return j;
}

ModeSet modeset_from_json(const nlohmann::json& j)
{
    try {
        const auto& h = j.at("header");
        const auto lam = j.at("lambdas").get<std::vector<double>>();
        const auto& cols = j.at("modes");
        const auto n = h.at("num_dofs").get<Eigen::Index>();
        if (static_cast<Eigen::Index>(lam.size()) != h.at("num_modes").get<Eigen::Index>() || cols.size() != lam.size())
            throw FormatError("mode JSON: count mismatch");
        Eigen::MatrixXd u(n, static_cast<Eigen::Index>(lam.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto v = cols[c].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(v.size()) != n) throw FormatError("mode JSON: column length mismatch");
            u.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
        }
        return ModeSet(Eigen::Map<const Eigen::VectorXd>(lam.data(), static_cast<Eigen::Index>(lam.size())), u,
                       h.value("mesh_fingerprint", ""), h.value("tolerances", nlohmann::json::object()).value("eigen_residual", 0.0),
                       h.value("shift", 0.0));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("mode JSON schema error: ") + e.what());
    }
}

} // namespace elastomodes
