#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gplandmark/errors.hpp"

namespace gplandmark {

enum class MeshFormat { Off, PlyAscii, Obj };
enum class CloudFormat { Xyz, Csv };

/** Embedded triangular mesh: vertex coordinates (N x 3) and face index triples (F x 3). */
struct TriangleMesh {
    Eigen::MatrixX3d vertices;
    Eigen::MatrixX3i faces;

    Eigen::Index num_vertices() const { return vertices.rows(); }
    Eigen::Index num_faces() const { return faces.rows(); }
};

/** Point set in R^D, one point per row. */
struct PointCloud {
    Eigen::MatrixXd points;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index ambient_dim() const { return points.cols(); }
};

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Lines keep their 1-based number so parse errors can point at the offending row.
struct NumberedLine {
    long number;
    std::string_view text;
};

inline std::vector<NumberedLine> split_lines(std::string_view text) {
    std::vector<NumberedLine> lines;
    long number = 1;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back({number, line});
        ++number;
        pos = end + 1;
        if (end == text.size()) break;
    }
    return lines;
}

inline std::vector<std::string_view> split_tokens(std::string_view line, char sep = '\0') {
    std::vector<std::string_view> tokens;
    if (sep == '\0') { // any whitespace
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
            if (i > start) tokens.push_back(line.substr(start, i - start));
        }
    } else {
        std::size_t pos = 0;
        for (;;) {
            std::size_t end = line.find(sep, pos);
            std::string_view tok = line.substr(pos, end == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : end - pos);
            while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
            while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
            tokens.push_back(tok);
            if (end == std::string_view::npos) break;
            pos = end + 1;
        }
    }
    return tokens;
}

inline double parse_double(std::string_view tok, long line) {
    double value = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
    return value;
}

inline double parse_coordinate(std::string_view tok, long line) {
    const double value = parse_double(tok, line);
    if (!std::isfinite(value))
        throw ParseError("non-finite coordinate '" + std::string(tok) + "'", line);
    return value;
}

// Counts above this are taken as header corruption rather than real meshes.
inline constexpr long kMaxElementCount = 100'000'000;

inline long parse_count(std::string_view tok, long line) {
    long value = 0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
    if (value < 0 || value > kMaxElementCount)
        throw ParseError("element count " + std::string(tok) + " is out of range", line);
    return value;
}

inline long parse_long(std::string_view tok, long line) {
    long value = 0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
    return value;
}

inline bool is_comment_or_blank(std::string_view line) {
    for (char c : line) {
        if (c == ' ' || c == '\t') continue;
        return c == '#';
    }
    return true;
}

} // namespace detail

/**
 * @brief Validate the TriangleMesh invariants, throwing ValidationError on the first hard failure.
 *
 * Hard errors: N < 3, F < 1, out-of-range face index, repeated index within a face,
 * exactly duplicated vertex coordinates. Non-manifold edges (more than two incident
 * faces) are soft: a diagnostic is appended to `warnings` when provided.
 */
inline void validate_mesh(const TriangleMesh& mesh, std::vector<std::string>* warnings = nullptr) {
    const Eigen::Index n = mesh.num_vertices();
    const Eigen::Index f = mesh.num_faces();
    if (n < 3) throw ValidationError("mesh needs at least 3 vertices, got " + std::to_string(n));
    if (f < 1) throw ValidationError("mesh needs at least 1 face, got " + std::to_string(f));

    for (Eigen::Index fi = 0; fi < f; ++fi) {
        const auto a = mesh.faces(fi, 0), b = mesh.faces(fi, 1), c = mesh.faces(fi, 2);
        for (int k = 0; k < 3; ++k) {
            const auto idx = mesh.faces(fi, k);
            if (idx < 0 || idx >= n)
                throw ValidationError("face " + std::to_string(fi) + " references vertex " +
                                      std::to_string(idx) + " outside [0, " + std::to_string(n) + ")");
        }
        if (a == b || b == c || a == c)
            throw ValidationError("degenerate face " + std::to_string(fi) +
                                  " repeats a vertex index");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        for (int k = 0; k < 3; ++k) {
            if (mesh.vertices(i, k) < mesh.vertices(j, k)) return true;
            if (mesh.vertices(i, k) > mesh.vertices(j, k)) return false;
        }
        return false;
    });
    for (std::size_t s = 1; s < order.size(); ++s) {
        const auto i = order[s - 1], j = order[s];
        if (mesh.vertices.row(i) == mesh.vertices.row(j))
            throw ValidationError("vertices " + std::to_string(i) + " and " + std::to_string(j) +
                                  " have identical coordinates");
    }

    if (warnings) {
        std::map<std::pair<Eigen::Index, Eigen::Index>, int> edge_faces;
        for (Eigen::Index fi = 0; fi < f; ++fi) {
            for (int k = 0; k < 3; ++k) {
                Eigen::Index u = mesh.faces(fi, k), v = mesh.faces(fi, (k + 1) % 3);
                if (u > v) std::swap(u, v);
                ++edge_faces[{u, v}];
            }
        }
        for (const auto& [edge, count] : edge_faces) {
            if (count > 2) {
                warnings->push_back("non-manifold edge (" + std::to_string(edge.first) + ", " +
                                    std::to_string(edge.second) + ") shared by " +
                                    std::to_string(count) + " faces");
            }
        }
    }
}

inline void validate_cloud(const PointCloud& cloud) {
    const Eigen::Index n = cloud.size();
    if (n < 2) throw ParseError("point cloud needs at least 2 points, got " + std::to_string(n));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        for (Eigen::Index k = 0; k < cloud.ambient_dim(); ++k) {
            if (cloud.points(i, k) < cloud.points(j, k)) return true;
            if (cloud.points(i, k) > cloud.points(j, k)) return false;
        }
        return false;
    });
    for (std::size_t s = 1; s < order.size(); ++s) {
        if (cloud.points.row(order[s - 1]) == cloud.points.row(order[s]))
            throw ValidationError("points " + std::to_string(order[s - 1]) + " and " +
                                  std::to_string(order[s]) + " are exact duplicates");
    }
}

namespace detail {

inline TriangleMesh parse_off(const std::vector<NumberedLine>& lines) {
    std::size_t li = 0;
    auto next_content = [&]() -> const NumberedLine* {
        while (li < lines.size()) {
            if (!is_comment_or_blank(lines[li].text)) return &lines[li++];
            ++li;
        }
        return nullptr;
    };

    const NumberedLine* header = next_content();
    if (!header) throw ParseError("empty OFF file");
    auto header_tokens = split_tokens(header->text);
    if (header_tokens.empty() || header_tokens[0] != "OFF")
        throw ParseError("expected OFF header", header->number);

    long nv = 0, nf = 0;
    if (header_tokens.size() >= 3) { // counts on the header line (common variant)
        nv = parse_count(header_tokens[1], header->number);
        nf = parse_count(header_tokens[2], header->number);
    } else {
        const NumberedLine* counts = next_content();
        if (!counts) throw ParseError("missing OFF counts line");
        auto tokens = split_tokens(counts->text);
        if (tokens.size() < 2 || tokens.size() > 3)
            throw ParseError("counts line must read 'N F [E]'", counts->number);
        nv = parse_count(tokens[0], counts->number);
        nf = parse_count(tokens[1], counts->number);
    }

    TriangleMesh mesh;
    mesh.vertices.resize(nv, 3);
    for (long i = 0; i < nv; ++i) {
        const NumberedLine* line = next_content();
        if (!line)
            throw ParseError("vertex block ended early: expected " + std::to_string(nv) +
                             " vertices, got " + std::to_string(i));
        auto tokens = split_tokens(line->text);
        if (tokens.size() != 3)
            throw ParseError("vertex line must have exactly 3 coordinates", line->number);
        for (int k = 0; k < 3; ++k) mesh.vertices(i, k) = parse_coordinate(tokens[k], line->number);
    }

    mesh.faces.resize(nf, 3);
    for (long i = 0; i < nf; ++i) {
        const NumberedLine* line = next_content();
        if (!line)
            throw ParseError("face block ended early: expected " + std::to_string(nf) +
                             " faces, got " + std::to_string(i));
        auto tokens = split_tokens(line->text);
        if (tokens.empty()) throw ParseError("empty face line", line->number);
        const long count = parse_long(tokens[0], line->number);
        if (count != 3)
            throw ParseError("only triangular faces are supported, got a face of size " +
                             std::to_string(count), line->number);
        if (tokens.size() != 4)
            throw ParseError("face line must read '3 i j k'", line->number);
        for (int k = 0; k < 3; ++k)
            mesh.faces(i, k) = static_cast<int>(parse_long(tokens[k + 1], line->number));
    }
    if (next_content()) throw ParseError("trailing content after face block");
    return mesh;
}

inline TriangleMesh parse_ply_ascii(const std::vector<NumberedLine>& lines) {
    std::size_t li = 0;
    auto next_line = [&]() -> const NumberedLine* {
        while (li < lines.size()) {
            if (!lines[li].text.empty()) return &lines[li++];
            ++li;
        }
        return nullptr;
    };

    const NumberedLine* magic = next_line();
    if (!magic || split_tokens(magic->text) != std::vector<std::string_view>{"ply"})
        throw ParseError("expected 'ply' magic line", magic ? magic->number : 1);

    struct Element {
        std::string name;
        long count = 0;
        std::vector<std::string> scalar_props; // in declaration order
        bool has_index_list = false;
    };
    std::vector<Element> elements;
    bool format_seen = false;

    for (;;) {
        const NumberedLine* line = next_line();
        if (!line) throw ParseError("PLY header not terminated by end_header");
        auto tokens = split_tokens(line->text);
        if (tokens.empty()) continue;
        if (tokens[0] == "comment") continue;
        if (tokens[0] == "format") {
            if (tokens.size() < 2) throw ParseError("malformed format line", line->number);
            if (tokens[1] != "ascii")
                throw ParseError("binary PLY is not supported; re-export as ASCII", line->number);
            format_seen = true;
        } else if (tokens[0] == "element") {
            if (tokens.size() != 3) throw ParseError("malformed element line", line->number);
            Element el;
            el.name = std::string(tokens[1]);
            el.count = parse_count(tokens[2], line->number);
            elements.push_back(std::move(el));
        } else if (tokens[0] == "property") {
            if (elements.empty()) throw ParseError("property before any element", line->number);
            if (tokens.size() >= 2 && tokens[1] == "list") {
                if (elements.back().name != "face")
                    throw ParseError("list property only supported on the face element",
                                     line->number);
                elements.back().has_index_list = true;
            } else {
                if (tokens.size() != 3) throw ParseError("malformed property line", line->number);
                elements.back().scalar_props.emplace_back(tokens[2]);
            }
        } else if (tokens[0] == "end_header") {
            break;
        } else {
            throw ParseError("unrecognized header keyword '" + std::string(tokens[0]) + "'",
                             line->number);
        }
    }
    if (!format_seen) throw ParseError("PLY header missing format line");

    const Element* vertex_el = nullptr;
    const Element* face_el = nullptr;
    for (const auto& el : elements) {
        if (el.name == "vertex") vertex_el = &el;
        else if (el.name == "face") face_el = &el;
        else throw ParseError("unsupported PLY element '" + el.name + "'");
    }
    if (!vertex_el || !face_el) throw ParseError("PLY needs vertex and face elements");
    if (!face_el->has_index_list) throw ParseError("face element missing its vertex index list");

    int xcol = -1, ycol = -1, zcol = -1;
    for (std::size_t p = 0; p < vertex_el->scalar_props.size(); ++p) {
        if (vertex_el->scalar_props[p] == "x") xcol = static_cast<int>(p);
        if (vertex_el->scalar_props[p] == "y") ycol = static_cast<int>(p);
        if (vertex_el->scalar_props[p] == "z") zcol = static_cast<int>(p);
    }
    if (xcol < 0 || ycol < 0 || zcol < 0)
        throw ParseError("vertex element must declare properties x, y, z");

    TriangleMesh mesh;
    mesh.vertices.resize(vertex_el->count, 3);
    for (long i = 0; i < vertex_el->count; ++i) {
        const NumberedLine* line = next_line();
        if (!line) throw ParseError("vertex data ended early at row " + std::to_string(i));
        auto tokens = split_tokens(line->text);
        if (tokens.size() != vertex_el->scalar_props.size())
            throw ParseError("vertex row has " + std::to_string(tokens.size()) +
                             " values, header declares " +
                             std::to_string(vertex_el->scalar_props.size()), line->number);
        mesh.vertices(i, 0) = parse_coordinate(tokens[static_cast<std::size_t>(xcol)], line->number);
        mesh.vertices(i, 1) = parse_coordinate(tokens[static_cast<std::size_t>(ycol)], line->number);
        mesh.vertices(i, 2) = parse_coordinate(tokens[static_cast<std::size_t>(zcol)], line->number);
    }

    mesh.faces.resize(face_el->count, 3);
    for (long i = 0; i < face_el->count; ++i) {
        const NumberedLine* line = next_line();
        if (!line) throw ParseError("face data ended early at row " + std::to_string(i));
        auto tokens = split_tokens(line->text);
        if (tokens.empty()) throw ParseError("empty face row", line->number);
        const long count = parse_long(tokens[0], line->number);
        if (count != 3)
            throw ParseError("only triangular faces are supported, got a face of size " +
                             std::to_string(count), line->number);
        if (tokens.size() != 4) throw ParseError("face row must read '3 i j k'", line->number);
        for (int k = 0; k < 3; ++k)
            mesh.faces(i, k) = static_cast<int>(parse_long(tokens[k + 1], line->number));
    }
    if (next_line()) throw ParseError("trailing content after face data");
    return mesh;
}

inline TriangleMesh parse_obj(const std::vector<NumberedLine>& lines) {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<long, 3>> faces;

    for (const auto& line : lines) {
        auto tokens = split_tokens(line.text);
        if (tokens.empty() || tokens[0][0] == '#') continue;
        if (tokens[0] == "v") {
            if (tokens.size() != 4)
                throw ParseError("vertex record must read 'v x y z'", line.number);
            vertices.push_back({parse_coordinate(tokens[1], line.number),
                                parse_coordinate(tokens[2], line.number),
                                parse_coordinate(tokens[3], line.number)});
        } else if (tokens[0] == "f") {
            if (tokens.size() != 4)
                throw ParseError("only triangular faces are supported", line.number);
            std::array<long, 3> face{};
            for (int k = 0; k < 3; ++k) {
                std::string_view ref = tokens[k + 1];
                const auto slash = ref.find('/');
                if (slash != std::string_view::npos) ref = ref.substr(0, slash);
                const long idx = parse_long(ref, line.number);
                if (idx <= 0)
                    throw ParseError("face indices must be positive 1-based", line.number);
                face[static_cast<std::size_t>(k)] = idx - 1;
            }
            faces.push_back(face);
        }
        // vn / vt / g / o / s / usemtl / mtllib records are ignored
    }

    TriangleMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (int k = 0; k < 3; ++k)
            mesh.vertices(static_cast<Eigen::Index>(i), k) = vertices[i][static_cast<std::size_t>(k)];
    mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t i = 0; i < faces.size(); ++i)
        for (int k = 0; k < 3; ++k)
            mesh.faces(static_cast<Eigen::Index>(i), k) =
                static_cast<int>(faces[i][static_cast<std::size_t>(k)]);
    return mesh;
}

} // namespace detail

/**
 * @brief Load a triangular mesh from an ASCII OFF, PLY, or OBJ file.
 *
 * The result satisfies every TriangleMesh invariant; vertex order is preserved from
 * the file. Non-manifold connectivity is accepted with a diagnostic in `warnings`.
 */
inline TriangleMesh load_mesh(const std::string& path, MeshFormat format,
                              std::vector<std::string>* warnings = nullptr) {
    const std::string text = detail::read_text_file(path);
    const auto lines = detail::split_lines(text);
    TriangleMesh mesh;
    switch (format) {
        case MeshFormat::Off: mesh = detail::parse_off(lines); break;
        case MeshFormat::PlyAscii: mesh = detail::parse_ply_ascii(lines); break;
        case MeshFormat::Obj: mesh = detail::parse_obj(lines); break;
    }
    validate_mesh(mesh, warnings);
    return mesh;
}

/// Load a point cloud from whitespace-separated (XYZ) or comma-separated (CSV) rows of floats.
inline PointCloud load_point_cloud(const std::string& path, CloudFormat format) {
    const std::string text = detail::read_text_file(path);
    const auto lines = detail::split_lines(text);
    std::vector<std::vector<double>> rows;
    Eigen::Index dim = -1;
    for (const auto& line : lines) {
        if (detail::is_comment_or_blank(line.text)) continue;
        auto tokens = detail::split_tokens(line.text, format == CloudFormat::Csv ? ',' : '\0');
        std::vector<double> row;
        row.reserve(tokens.size());
        for (auto tok : tokens) row.push_back(detail::parse_coordinate(tok, line.number));
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(row.size());
            if (dim == 0) throw ParseError("empty data row", line.number);
        } else if (static_cast<Eigen::Index>(row.size()) != dim) {
            throw ParseError("row has " + std::to_string(row.size()) +
                             " columns, previous rows have " + std::to_string(dim), line.number);
        }
        rows.push_back(std::move(row));
    }

    PointCloud cloud;
    cloud.points.resize(static_cast<Eigen::Index>(rows.size()), std::max<Eigen::Index>(dim, 0));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index k = 0; k < dim; ++k)
            cloud.points(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    validate_cloud(cloud);
    return cloud;
}

/// View the mesh vertices as a point cloud (coordinate-exact, order preserved).
inline PointCloud mesh_to_cloud(const TriangleMesh& mesh) {
    PointCloud cloud;
    cloud.points = mesh.vertices;
    return cloud;
}

namespace detail {

inline void append_full_precision(std::string& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += buf;
}

} // namespace detail

/// Debug writer: ASCII OFF with full-precision coordinates (round-trips exactly through load_mesh).
inline void write_off(const TriangleMesh& mesh, const std::string& path) {
    std::string out = "OFF\n";
    out += std::to_string(mesh.num_vertices()) + " " + std::to_string(mesh.num_faces()) + " 0\n";
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
        for (int k = 0; k < 3; ++k) {
            if (k) out += ' ';
            detail::append_full_precision(out, mesh.vertices(i, k));
        }
        out += '\n';
    }
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        out += "3";
        for (int k = 0; k < 3; ++k) out += " " + std::to_string(mesh.faces(f, k));
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write file: " + path);
    file << out;
}

/// Debug writer: whitespace-separated rows with full-precision coordinates.
inline void write_xyz(const PointCloud& cloud, const std::string& path) {
    std::string out;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (Eigen::Index k = 0; k < cloud.ambient_dim(); ++k) {
            if (k) out += ' ';
            detail::append_full_precision(out, cloud.points(i, k));
        }
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write file: " + path);
    file << out;
}

/// Map a file extension to a mesh format, if recognized.
inline std::optional<MeshFormat> mesh_format_from_extension(std::string_view path) {
    const auto dot = path.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    std::string ext(path.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == "off") return MeshFormat::Off;
    if (ext == "ply") return MeshFormat::PlyAscii;
    if (ext == "obj") return MeshFormat::Obj;
    return std::nullopt;
}

inline std::optional<CloudFormat> cloud_format_from_extension(std::string_view path) {
    const auto dot = path.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    std::string ext(path.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == "xyz") return CloudFormat::Xyz;
    if (ext == "csv") return CloudFormat::Csv;
    return std::nullopt;
}

} // namespace gplandmark
