#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gplandmark/mesh_io.hpp"
#include "gplandmark/synthetic.hpp"

using namespace gplandmark;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "gplandmark_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = temp_file(name);
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

} // namespace

TEST_CASE("minimal OFF file parses") {
    const auto path = write_temp("tri.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    const TriangleMesh mesh = load_mesh(path, MeshFormat::Off);
    REQUIRE(mesh.num_vertices() == 3);
    REQUIRE(mesh.num_faces() == 1);
    CHECK(mesh.faces(0, 0) == 0);
    CHECK(mesh.faces(0, 1) == 1);
    CHECK(mesh.faces(0, 2) == 2);
    CHECK(mesh.vertices(1, 0) == 1.0);
}

TEST_CASE("OFF count mismatch is a parse error at the vertex block") {
    const auto path = write_temp("short.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    CHECK_THROWS_AS(load_mesh(path, MeshFormat::Off), ParseError);
}

TEST_CASE("OFF parse errors carry line numbers") {
    const auto path = write_temp("badtok.off", "OFF\n3 1 0\n0 0 0\n1 zzz 0\n0 1 0\n3 0 1 2\n");
    try {
        load_mesh(path, MeshFormat::Off);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("OFF rejects polygons, bad indices, and duplicates") {
    CHECK_THROWS_AS(load_mesh(write_temp("quad.off",
                                          "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"),
                              MeshFormat::Off),
                    ParseError);
    CHECK_THROWS_AS(load_mesh(write_temp("oob.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n"),
                              MeshFormat::Off),
                    ValidationError);
    CHECK_THROWS_AS(load_mesh(write_temp("dup.off",
                                          "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 0\n3 0 1 2\n3 1 2 3\n"),
                              MeshFormat::Off),
                    ValidationError);
}

TEST_CASE("OBJ parses v/f records and rejects degenerate faces") {
    const auto good = write_temp("tri.obj", "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const TriangleMesh mesh = load_mesh(good, MeshFormat::Obj);
    REQUIRE(mesh.num_faces() == 1);
    CHECK(mesh.faces(0, 2) == 2);

    const auto degen = write_temp("degen.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 2\n");
    CHECK_THROWS_AS(load_mesh(degen, MeshFormat::Obj), ValidationError);
}

TEST_CASE("OBJ accepts slash-form face references") {
    const auto path =
        write_temp("slash.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n");
    const TriangleMesh mesh = load_mesh(path, MeshFormat::Obj);
    CHECK(mesh.num_faces() == 1);
}

TEST_CASE("ASCII PLY parses, binary PLY is rejected") {
    const std::string header = "ply\nformat ascii 1.0\nelement vertex 3\n"
                               "property float x\nproperty float y\nproperty float z\n"
                               "element face 1\nproperty list uchar int vertex_indices\n"
                               "end_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
    const TriangleMesh mesh = load_mesh(write_temp("tri.ply", header), MeshFormat::PlyAscii);
    CHECK(mesh.num_vertices() == 3);

    const std::string binary = "ply\nformat binary_little_endian 1.0\nend_header\n";
    try {
        load_mesh(write_temp("bin.ply", binary), MeshFormat::PlyAscii);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("binary") != std::string::npos);
    }
}

TEST_CASE("non-manifold meshes load with a warning") {
    // three faces sharing the edge (0, 1)
    const auto path = write_temp("fan.off",
                                 "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n"
                                 "3 0 1 2\n3 0 1 3\n3 0 1 4\n");
    std::vector<std::string> warnings;
    const TriangleMesh mesh = load_mesh(path, MeshFormat::Off, &warnings);
    CHECK(mesh.num_faces() == 3);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("non-manifold") != std::string::npos);
}

TEST_CASE("XYZ and CSV clouds parse with strict column checks") {
    const PointCloud xyz =
        load_point_cloud(write_temp("two.xyz", "0 0 0\n1 1 1\n"), CloudFormat::Xyz);
    CHECK(xyz.size() == 2);
    CHECK(xyz.ambient_dim() == 3);

    CHECK_THROWS_AS(load_point_cloud(write_temp("ragged.csv", "0,0,0\n1,1,1,1\n"),
                                     CloudFormat::Csv),
                    ParseError);
    CHECK_THROWS_AS(load_point_cloud(write_temp("empty.xyz", ""), CloudFormat::Xyz), ParseError);
    CHECK_THROWS_AS(load_point_cloud(write_temp("single.xyz", "0 0 0\n"), CloudFormat::Xyz),
                    ParseError);
    CHECK_THROWS_AS(load_point_cloud(write_temp("text.csv", "a,b,c\n0,0,0\n1,1,1\n"),
                                     CloudFormat::Csv),
                    ParseError);
}

TEST_CASE("mesh_to_cloud preserves vertices exactly") {
    const TriangleMesh mesh = icosphere(1);
    const PointCloud cloud = mesh_to_cloud(mesh);
    REQUIRE(cloud.size() == mesh.num_vertices());
    REQUIRE(cloud.ambient_dim() == 3);
    for (Eigen::Index i = 0; i < cloud.size(); ++i)
        CHECK(cloud.points.row(i) == mesh.vertices.row(i));
}

TEST_CASE("OFF round-trip through the debug writer is exact") {
    const TriangleMesh original = perturbed(icosphere(2), 1e-3, 99);
    const auto path = temp_file("roundtrip.off").string();
    write_off(original, path);
    const TriangleMesh reloaded = load_mesh(path, MeshFormat::Off);
    REQUIRE(reloaded.num_vertices() == original.num_vertices());
    REQUIRE(reloaded.num_faces() == original.num_faces());
    CHECK(reloaded.vertices == original.vertices);
    CHECK(reloaded.faces == original.faces);
}

TEST_CASE("parsing is deterministic") {
    const auto path = write_temp("det.off", "OFF\n3 1 0\n0.125 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    const TriangleMesh a = load_mesh(path, MeshFormat::Off);
    const TriangleMesh b = load_mesh(path, MeshFormat::Off);
    CHECK(a.vertices == b.vertices);
    CHECK(a.faces == b.faces);
}

TEST_CASE("non-finite coordinates and corrupt counts are parse errors") {
    CHECK_THROWS_AS(load_mesh(write_temp("nan.off",
                                          "OFF\n3 1 0\n0 0 nan\n1 0 0\n0 1 0\n3 0 1 2\n"),
                              MeshFormat::Off),
                    ParseError);
    CHECK_THROWS_AS(load_mesh(write_temp("huge.off", "OFF\n99999999999999 1 0\n0 0 0\n"),
                              MeshFormat::Off),
                    ParseError);
    CHECK_THROWS_AS(load_point_cloud(write_temp("inf.xyz", "0 0 inf\n1 1 1\n"),
                                     CloudFormat::Xyz),
                    ParseError);
}

TEST_CASE("format guessing by extension") {
    CHECK(mesh_format_from_extension("a/b/mesh.off") == MeshFormat::Off);
    CHECK(mesh_format_from_extension("mesh.PLY") == MeshFormat::PlyAscii);
    CHECK(cloud_format_from_extension("pts.xyz") == CloudFormat::Xyz);
    CHECK_FALSE(mesh_format_from_extension("noext").has_value());
}
