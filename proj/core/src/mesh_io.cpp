#include "reliefkit/mesh_io.hpp"

#include "reliefkit/io_util.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace relief {
namespace {

std::string lowercase_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

// ---- OBJ ----

LoadedMesh load_obj(const std::string& text) {
    TriangleMesh mesh;
    std::vector<Vec3> normals;
    std::vector<std::array<double, 2>> uvs;
    // f-records reference v/vt/vn triples; remap to per-vertex attributes,
    // duplicating vertices only when a vertex is used with conflicting
    // attribute indices.
    struct Corner {
        long v = 0, vt = 0, vn = 0;
    };
    std::vector<std::array<Corner, 3>> face_corners;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        const std::string& key = tokens[0];
        if (key == "v" && tokens.size() >= 4) {
            mesh.vertices.push_back({std::strtod(tokens[1].c_str(), nullptr),
                                     std::strtod(tokens[2].c_str(), nullptr),
                                     std::strtod(tokens[3].c_str(), nullptr)});
        } else if (key == "vn" && tokens.size() >= 4) {
            normals.push_back({std::strtod(tokens[1].c_str(), nullptr),
                               std::strtod(tokens[2].c_str(), nullptr),
                               std::strtod(tokens[3].c_str(), nullptr)});
        } else if (key == "vt" && tokens.size() >= 3) {
            uvs.push_back({std::strtod(tokens[1].c_str(), nullptr),
                           std::strtod(tokens[2].c_str(), nullptr)});
        } else if (key == "f" && tokens.size() >= 4) {
            if (tokens.size() != 4) throw Error("obj: non-triangular face");
            std::array<Corner, 3> tri;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                Corner c;
                const char* s = tokens[i].c_str();
                char* end = nullptr;
                c.v = std::strtol(s, &end, 10);
                if (end == s) throw Error("obj: malformed face corner '" + tokens[i] + "'");
                if (*end == '/') {
                    s = end + 1;
                    if (*s != '/') c.vt = std::strtol(s, &end, 10);
                    else end = const_cast<char*>(s);
                    if (*end == '/') c.vn = std::strtol(end + 1, nullptr, 10);
                }
                tri[i - 1] = c;
            }
            face_corners.push_back(tri);
        } else if (key == "f") {
            throw Error("obj: non-triangular face");
        }
    }

    auto resolve = [](long idx, std::size_t count, const char* what) -> std::uint32_t {
        long r = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
        if (r < 0 || r >= static_cast<long>(count))
            throw Error(std::string("obj: ") + what + " index out of range");
        return static_cast<std::uint32_t>(r);
    };

    const bool want_normals = !normals.empty();
    const bool want_uvs = !uvs.empty();
    if (want_normals) mesh.normals.assign(mesh.vertices.size(), Vec3{0, 0, 0});
    if (want_uvs) mesh.uvs.assign(mesh.vertices.size(), {0, 0});
    std::vector<long> assigned_vn(mesh.vertices.size(), 0);
    std::vector<long> assigned_vt(mesh.vertices.size(), 0);

    for (const auto& corners : face_corners) {
        FaceIndices face{};
        for (int k = 0; k < 3; ++k) {
            const Corner& c = corners[k];
            std::uint32_t vi = resolve(c.v, mesh.vertices.size(), "vertex");
            if (want_normals && c.vn != 0) {
                std::uint32_t ni = resolve(c.vn, normals.size(), "normal");
                if (assigned_vn[vi] != 0 && assigned_vn[vi] != c.vn) {
                    // Conflicting attribute: split the vertex.
                    mesh.vertices.push_back(mesh.vertices[vi]);
                    mesh.normals.push_back(normals[ni]);
                    if (want_uvs) mesh.uvs.push_back(mesh.uvs[vi]);
                    assigned_vn.push_back(c.vn);
                    assigned_vt.push_back(assigned_vt[vi]);
                    vi = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
                } else {
                    mesh.normals[vi] = normals[ni];
                    assigned_vn[vi] = c.vn;
                }
            }
            if (want_uvs && c.vt != 0) {
                std::uint32_t ti = resolve(c.vt, uvs.size(), "texcoord");
                mesh.uvs[vi] = uvs[ti];
                assigned_vt[vi] = c.vt;
            }
            face[k] = vi;
        }
        mesh.faces.push_back(face);
    }

    LoadedMesh loaded;
    loaded.mesh = std::move(mesh);
    return loaded;
}

// ---- PLY ----

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(const std::string& name) {
    if (name == "char" || name == "int8") return PlyType::I8;
    if (name == "uchar" || name == "uint8") return PlyType::U8;
    if (name == "short" || name == "int16") return PlyType::I16;
    if (name == "ushort" || name == "uint16") return PlyType::U16;
    if (name == "int" || name == "int32") return PlyType::I32;
    if (name == "uint" || name == "uint32") return PlyType::U32;
    if (name == "float" || name == "float32") return PlyType::F32;
    if (name == "double" || name == "float64") return PlyType::F64;
    throw Error("ply: unknown property type '" + name + "'");
}

std::size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::I8:
        case PlyType::U8: return 1;
        case PlyType::I16:
        case PlyType::U16: return 2;
        case PlyType::I32:
        case PlyType::U32:
        case PlyType::F32: return 4;
        case PlyType::F64: return 8;
    }
    return 0;
}

struct PlyProperty {
    bool is_list = false;
    PlyType count_type = PlyType::U8;
    PlyType value_type = PlyType::F32;
    std::string name;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

class BinaryCursor {
public:
    BinaryCursor(const std::string& data, std::size_t offset) : data_(data), pos_(offset) {}

    double read(PlyType t) {
        const std::size_t size = ply_type_size(t);
        if (pos_ + size > data_.size()) throw Error("ply: unexpected end of binary data");
        const char* p = data_.data() + pos_;
        pos_ += size;
        switch (t) {
            case PlyType::I8: return static_cast<double>(static_cast<std::int8_t>(*p));
            case PlyType::U8: return static_cast<double>(static_cast<std::uint8_t>(*p));
            case PlyType::I16: {
                std::int16_t v;
                std::memcpy(&v, p, 2);
                return v;
            }
            case PlyType::U16: {
                std::uint16_t v;
                std::memcpy(&v, p, 2);
                return v;
            }
            case PlyType::I32: {
                std::int32_t v;
                std::memcpy(&v, p, 4);
                return v;
            }
            case PlyType::U32: {
                std::uint32_t v;
                std::memcpy(&v, p, 4);
                return v;
            }
            case PlyType::F32: {
                float v;
                std::memcpy(&v, p, 4);
                return v;
            }
            case PlyType::F64: {
                double v;
                std::memcpy(&v, p, 8);
                return v;
            }
        }
        return 0;
    }

private:
    const std::string& data_;
    std::size_t pos_;
};

class AsciiCursor {
public:
    AsciiCursor(const std::string& data, std::size_t offset) : in_(data.substr(offset)) {}

    double read(PlyType) {
        double v;
        if (!(in_ >> v)) throw Error("ply: unexpected end of ascii data");
        return v;
    }

private:
    std::istringstream in_;
};

LoadedMesh load_ply(const std::string& data) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        std::size_t nl = data.find('\n', pos);
        if (nl == std::string::npos) throw Error("ply: truncated header");
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") throw Error("ply: missing magic");
    bool binary = false;
    std::vector<PlyElement> elements;
    for (;;) {
        std::string line = next_line();
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
        if (tokens[0] == "format") {
            if (tokens.size() < 2) throw Error("ply: malformed format line");
            if (tokens[1] == "ascii") binary = false;
            else if (tokens[1] == "binary_little_endian") binary = true;
            else throw Error("ply: unsupported format '" + tokens[1] + "'");
        } else if (tokens[0] == "element") {
            if (tokens.size() < 3) throw Error("ply: malformed element line");
            PlyElement el;
            el.name = tokens[1];
            el.count = std::strtoull(tokens[2].c_str(), nullptr, 10);
            elements.push_back(el);
        } else if (tokens[0] == "property") {
            if (elements.empty()) throw Error("ply: property before element");
            PlyProperty prop;
            if (tokens.size() >= 5 && tokens[1] == "list") {
                prop.is_list = true;
                prop.count_type = ply_type(tokens[2]);
                prop.value_type = ply_type(tokens[3]);
                prop.name = tokens[4];
            } else if (tokens.size() >= 3) {
                prop.value_type = ply_type(tokens[1]);
                prop.name = tokens[2];
            } else {
                throw Error("ply: malformed property line");
            }
            elements.back().properties.push_back(prop);
        } else if (tokens[0] == "end_header") {
            break;
        } else {
            throw Error("ply: unknown header line '" + line + "'");
        }
    }

    LoadedMesh loaded;
    TriangleMesh& mesh = loaded.mesh;
    bool any_color = false;

    auto parse_elements = [&](auto& cursor) {
        for (const PlyElement& el : elements) {
            if (el.name == "vertex") {
                int xi = -1, yi = -1, zi = -1, nxi = -1, nyi = -1, nzi = -1;
                for (std::size_t p = 0; p < el.properties.size(); ++p) {
                    const std::string& n = el.properties[p].name;
                    if (n == "x") xi = static_cast<int>(p);
                    else if (n == "y") yi = static_cast<int>(p);
                    else if (n == "z") zi = static_cast<int>(p);
                    else if (n == "nx") nxi = static_cast<int>(p);
                    else if (n == "ny") nyi = static_cast<int>(p);
                    else if (n == "nz") nzi = static_cast<int>(p);
                }
                if (xi < 0 || yi < 0 || zi < 0) throw Error("ply: vertex element lacks x/y/z");
                const bool has_n = nxi >= 0 && nyi >= 0 && nzi >= 0;
                mesh.vertices.reserve(el.count);
                if (has_n) mesh.normals.reserve(el.count);
                std::vector<double> row(el.properties.size());
                for (std::size_t i = 0; i < el.count; ++i) {
                    for (std::size_t p = 0; p < el.properties.size(); ++p) {
                        if (el.properties[p].is_list) {
                            std::size_t n = static_cast<std::size_t>(cursor.read(el.properties[p].count_type));
                            for (std::size_t j = 0; j < n; ++j) cursor.read(el.properties[p].value_type);
                            row[p] = 0;
                        } else {
                            row[p] = cursor.read(el.properties[p].value_type);
                        }
                    }
                    mesh.vertices.push_back({row[xi], row[yi], row[zi]});
                    if (has_n) mesh.normals.push_back({row[nxi], row[nyi], row[nzi]});
                }
            } else if (el.name == "face") {
                int ri = -1, gi = -1, bi = -1;
                int list_index = -1;
                for (std::size_t p = 0; p < el.properties.size(); ++p) {
                    const auto& prop = el.properties[p];
                    if (prop.is_list && (prop.name == "vertex_indices" || prop.name == "vertex_index"))
                        list_index = static_cast<int>(p);
                    else if (prop.name == "red") ri = static_cast<int>(p);
                    else if (prop.name == "green") gi = static_cast<int>(p);
                    else if (prop.name == "blue") bi = static_cast<int>(p);
                }
                if (list_index < 0) throw Error("ply: face element lacks vertex index list");
                const bool has_color = ri >= 0 && gi >= 0 && bi >= 0;
                std::vector<double> scalars(el.properties.size());
                std::vector<std::uint32_t> poly;
                for (std::size_t i = 0; i < el.count; ++i) {
                    poly.clear();
                    for (std::size_t p = 0; p < el.properties.size(); ++p) {
                        const auto& prop = el.properties[p];
                        if (prop.is_list) {
                            std::size_t n = static_cast<std::size_t>(cursor.read(prop.count_type));
                            for (std::size_t j = 0; j < n; ++j) {
                                double v = cursor.read(prop.value_type);
                                if (static_cast<int>(p) == list_index)
                                    poly.push_back(static_cast<std::uint32_t>(v));
                            }
                        } else {
                            scalars[p] = cursor.read(prop.value_type);
                        }
                    }
                    if (poly.size() != 3) throw Error("ply: non-triangular face");
                    mesh.faces.push_back({poly[0], poly[1], poly[2]});
                    if (has_color) {
                        loaded.face_colors.push_back({static_cast<std::uint8_t>(scalars[ri]),
                                                      static_cast<std::uint8_t>(scalars[gi]),
                                                      static_cast<std::uint8_t>(scalars[bi])});
                        any_color = true;
                    }
                }
            } else {
                // Skip unknown element payload.
                for (std::size_t i = 0; i < el.count; ++i) {
                    for (const auto& prop : el.properties) {
                        if (prop.is_list) {
                            std::size_t n = static_cast<std::size_t>(cursor.read(prop.count_type));
                            for (std::size_t j = 0; j < n; ++j) cursor.read(prop.value_type);
                        } else {
                            cursor.read(prop.value_type);
                        }
                    }
                }
            }
        }
    };

    if (binary) {
        BinaryCursor cursor(data, pos);
        parse_elements(cursor);
    } else {
        AsciiCursor cursor(data, pos);
        parse_elements(cursor);
    }
    if (!any_color) loaded.face_colors.clear();
    return loaded;
}

void append_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void append_f32(std::string& out, float v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void append_f64(std::string& out, double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

} // namespace

LoadedMesh load_mesh(const std::string& path) {
    const std::string ext = lowercase_ext(path);
    const std::string data = read_file(path);
    LoadedMesh loaded;
    if (ext == "obj") loaded = load_obj(data);
    else if (ext == "ply") loaded = load_ply(data);
    else throw Error("unsupported mesh format: " + path);

    ValidationReport report = validate_mesh(loaded.mesh);
    loaded.degenerate_dropped = static_cast<std::uint32_t>(report.degenerate_faces_dropped);
    if (report.degenerate_faces_dropped > 0 && !loaded.face_colors.empty()) {
        std::vector<Rgb> remapped;
        remapped.reserve(report.kept_faces.size());
        for (std::uint32_t original : report.kept_faces)
            remapped.push_back(loaded.face_colors[original]);
        loaded.face_colors = std::move(remapped);
    }
    return loaded;
}

void save_mesh_obj(const std::string& path, const TriangleMesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 20);
    for (const Vec3& v : mesh.vertices) {
        out += "v ";
        out += fmt_double(v.x);
        out += ' ';
        out += fmt_double(v.y);
        out += ' ';
        out += fmt_double(v.z);
        out += '\n';
    }
    if (mesh.has_uvs()) {
        for (const auto& t : mesh.uvs) {
            out += "vt ";
            out += fmt_double(t[0]);
            out += ' ';
            out += fmt_double(t[1]);
            out += '\n';
        }
    }
    if (mesh.has_normals()) {
        for (const Vec3& n : mesh.normals) {
            out += "vn ";
            out += fmt_double(n.x);
            out += ' ';
            out += fmt_double(n.y);
            out += ' ';
            out += fmt_double(n.z);
            out += '\n';
        }
    }
    const bool vt = mesh.has_uvs(), vn = mesh.has_normals();
    for (const FaceIndices& f : mesh.faces) {
        out += 'f';
        for (int k = 0; k < 3; ++k) {
            const std::string idx = std::to_string(f[k] + 1);
            out += ' ';
            out += idx;
            if (vt || vn) {
                out += '/';
                if (vt) out += idx;
                if (vn) {
                    out += '/';
                    out += idx;
                }
            }
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

void export_labeled_mesh(const std::string& path, const TriangleMesh& mesh,
                         const PatternLabeling& labeling, PlyEncoding encoding) {
    if (labeling.labels.size() != mesh.faces.size())
        throw Error("labeled export: label count does not match face count");
    const bool with_conf = labeling.has_confidences();
    if (with_conf && labeling.confidences.size() != mesh.faces.size())
        throw Error("labeled export: confidence count does not match face count");

    std::ostringstream header;
    header << "ply\n";
    header << "format "
           << (encoding == PlyEncoding::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
    header << "element vertex " << mesh.vertices.size() << "\n";
    header << "property double x\nproperty double y\nproperty double z\n";
    if (mesh.has_normals())
        header << "property double nx\nproperty double ny\nproperty double nz\n";
    header << "element face " << mesh.faces.size() << "\n";
    header << "property list uchar uint vertex_indices\n";
    header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (with_conf) header << "property float confidence\n";
    header << "end_header\n";

    std::string out = header.str();
    if (encoding == PlyEncoding::Ascii) {
        std::ostringstream body;
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
            const Vec3& v = mesh.vertices[i];
            body << fmt_double(v.x) << ' ' << fmt_double(v.y) << ' ' << fmt_double(v.z);
            if (mesh.has_normals()) {
                const Vec3& n = mesh.normals[i];
                body << ' ' << fmt_double(n.x) << ' ' << fmt_double(n.y) << ' ' << fmt_double(n.z);
            }
            body << '\n';
        }
        for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
            const FaceIndices& f = mesh.faces[i];
            const Rgb c = label_color(labeling.labels[i]);
            body << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << ' ' << int(c[0]) << ' '
                 << int(c[1]) << ' ' << int(c[2]);
            if (with_conf) body << ' ' << fmt_double(static_cast<float>(labeling.confidences[i]));
            body << '\n';
        }
        out += body.str();
    } else {
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
            const Vec3& v = mesh.vertices[i];
            append_f64(out, v.x);
            append_f64(out, v.y);
            append_f64(out, v.z);
            if (mesh.has_normals()) {
                const Vec3& n = mesh.normals[i];
                append_f64(out, n.x);
                append_f64(out, n.y);
                append_f64(out, n.z);
            }
        }
        for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
            const FaceIndices& f = mesh.faces[i];
            out += '\x03';
            append_u32(out, f[0]);
            append_u32(out, f[1]);
            append_u32(out, f[2]);
            const Rgb c = label_color(labeling.labels[i]);
            out += static_cast<char>(c[0]);
            out += static_cast<char>(c[1]);
            out += static_cast<char>(c[2]);
            if (with_conf) append_f32(out, static_cast<float>(labeling.confidences[i]));
        }
    }
    write_file_atomic(path, out);
}

std::optional<PatternLabeling> labeling_from_colors(const std::vector<Rgb>& face_colors) {
    PatternLabeling labeling;
    labeling.labels.reserve(face_colors.size());
    for (const Rgb& c : face_colors) {
        std::uint32_t label = 0;
        if (!color_to_label(c, label)) return std::nullopt;
        labeling.labels.push_back(label);
    }
    return labeling;
}

} // namespace relief
