#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "elastomodes/hash.hpp"
#include "elastomodes/modeset_io.hpp"
#include "elastomodes/vtk.hpp"
#include "fixtures.hpp"

using namespace elastomodes;

namespace {

ModeSet sample_modes()
{
    Eigen::MatrixXd u(4, 3);
    u << 1.0, -0.25, 1e-300, 0.5, 2.0, -3.75, 0.0, 0.125, 7.0, -1.5, 1.0 / 3.0, 0.1;
    return ModeSet(Eigen::Vector3d(0.5, 2.0, 2.0), u, "f00d", 1e-8, 0.25);
}

std::filesystem::path temp_dir()
{
    const auto d = std::filesystem::temp_directory_path() / ("elastomodes_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
}

} // namespace

TEST(Sha256, KnownDigest)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(ModeSetContainer, BinaryLayout)
{
    const ModeSet s = sample_modes();
    const std::string bytes = encode_modeset(s);
    ASSERT_EQ(bytes.compare(0, 8, std::string(kModeSetMagic, 8)), 0);
    std::uint64_t len = 0;
    for (int i = 7; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    const auto header = nlohmann::json::parse(bytes.substr(16, len));
    EXPECT_EQ(header["num_modes"], 3);
    EXPECT_EQ(header["num_dofs"], 4);
    EXPECT_EQ(header["mesh_fingerprint"], "f00d");
    EXPECT_EQ(bytes.size(), 16 + len + 8 * (3 + 12));

    // Payload: lambdas then column-major modes, little-endian doubles.
    const auto value_at = [&](std::size_t i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[16 + len + 8 * i + b]);
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    };
    EXPECT_EQ(value_at(0), 0.5);
    EXPECT_EQ(value_at(3), 1.0);            // u(0,0)
    EXPECT_EQ(value_at(4), 0.5);            // u(1,0)
    EXPECT_EQ(value_at(3 + 4), -0.25);      // u(0,1)
    EXPECT_EQ(value_at(3 + 8 + 3), 0.1);    // u(3,2)
}

TEST(ModeSetContainer, RoundTripsBitwise)
{
    const ModeSet s = sample_modes();
    nlohmann::json header;
    const ModeSet back = decode_modeset(encode_modeset(s, {{"note", "x"}}), &header);
    EXPECT_EQ(back.lambdas(), s.lambdas());
    EXPECT_EQ(back.modes(), s.modes());
    EXPECT_EQ(back.mesh_fingerprint(), s.mesh_fingerprint());
    EXPECT_EQ(back.eigen_tolerance(), s.eigen_tolerance());
    EXPECT_EQ(back.shift(), s.shift());
    EXPECT_EQ(header["extra"]["note"], "x");
    EXPECT_EQ(encode_modeset(back, {{"note", "x"}}), encode_modeset(s, {{"note", "x"}}));

    const ModeSet from_json = modeset_from_json(nlohmann::json::parse(modeset_to_json(s).dump()));
    EXPECT_EQ(from_json.lambdas(), s.lambdas());
    EXPECT_EQ(from_json.modes(), s.modes());
}

TEST(ModeSetContainer, FilesAndAutodetect)
{
    const auto dir = temp_dir();
    const ModeSet s = sample_modes();
    write_modeset(dir / "m.bin", s);
    write_modeset(dir / "m.json", s);
    EXPECT_EQ(read_modeset(dir / "m.bin").modes(), s.modes());
    EXPECT_EQ(read_modeset(dir / "m.json").modes(), s.modes());
    std::ifstream in(dir / "m.json");
    EXPECT_EQ(in.peek(), '{');
    std::filesystem::remove_all(dir);
}

TEST(ModeSetContainer, CorruptInputRejected)
{
    const std::string bytes = encode_modeset(sample_modes());
    EXPECT_THROW(decode_modeset("NOTMODES" + bytes.substr(8)), FormatError);
    EXPECT_THROW(decode_modeset(bytes.substr(0, bytes.size() - 8)), FormatError);
    EXPECT_THROW(decode_modeset(bytes.substr(0, 12)), FormatError);
    EXPECT_THROW(read_modeset("/nonexistent/modes.bin"), Error);
}

TEST(ModeSetContainer, SolvedModesRoundTrip)
{
    const auto p = fixture::heterogeneous(3, 2, 2, 21);
    const ModeSet s = eigs_smallest(p.k, p.m, 4).with_fingerprint(p.mesh.fingerprint());
    const ModeSet back = decode_modeset(encode_modeset(s));
    EXPECT_EQ(back.modes(), s.modes());
    EXPECT_EQ(back.mesh_fingerprint(), p.mesh.fingerprint());
}

TEST(Vtk, LegacyLayout)
{
    const Mesh m = generate_box(1, 1, 1, 1, 1, 1, DirichletPlanes::parse("x0"));
    Eigen::VectorXd disp = Eigen::VectorXd::Zero(3 * 8);
    disp(3 * 7 + 2) = 0.25;
    const std::string text = vtk_text(m, {{"displacement", disp}, {"mode_0", disp}}, "box");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# vtk DataFile Version 3.0");
    std::getline(in, line);
    EXPECT_EQ(line, "box");
    std::getline(in, line);
    EXPECT_EQ(line, "ASCII");
    std::getline(in, line);
    EXPECT_EQ(line, "DATASET UNSTRUCTURED_GRID");
    EXPECT_NE(text.find("POINTS 8 double"), std::string::npos);
    EXPECT_NE(text.find("CELLS 6 30"), std::string::npos);
    EXPECT_NE(text.find("CELL_TYPES 6"), std::string::npos);
    EXPECT_NE(text.find("POINT_DATA 8"), std::string::npos);
    EXPECT_NE(text.find("VECTORS displacement double"), std::string::npos);
    EXPECT_NE(text.find("VECTORS mode_0 double"), std::string::npos);

    std::size_t tens = 0;
    const auto pos = text.find("CELL_TYPES 6\n") + 13;
    std::istringstream types(text.substr(pos));
    for (int i = 0; i < 6; ++i) {
        int t;
        types >> t;
        tens += t == 10;
    }
    EXPECT_EQ(tens, 6u);
    EXPECT_THROW(vtk_text(m, {{"bad", Eigen::VectorXd::Zero(5)}}), Error);
}

TEST(Vtk, DeterministicText)
{
    const Mesh m = generate_box(2, 1, 1, 1, 1, 1, DirichletPlanes::parse("x0"));
    const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(3 * static_cast<int>(m.num_nodes()), -1.0, 1.0);
    EXPECT_EQ(vtk_text(m, {{"u", d}}), vtk_text(m, {{"u", d}}));
}
