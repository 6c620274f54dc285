#pragma once

#include "reliefkit/labeling.hpp"
#include "reliefkit/mesh.hpp"

#include <optional>
#include <string>

namespace relief {

struct LoadedMesh {
    TriangleMesh mesh;
    std::vector<Rgb> face_colors; // non-empty when the file carried per-face color
    std::uint32_t degenerate_dropped = 0;
};

// Format chosen by extension: .obj (ASCII) or .ply (ASCII or binary
// little-endian, auto-detected from the header). Faces with more or fewer
// than three vertices are an error. The mesh is validated on load.
LoadedMesh load_mesh(const std::string& path);

void save_mesh_obj(const std::string& path, const TriangleMesh& mesh);

enum class PlyEncoding { Ascii, BinaryLittleEndian };

// PLY with per-face uchar RGB taken from the label palette. Confidences,
// when present, are written as an extra float property per face.
void export_labeled_mesh(const std::string& path, const TriangleMesh& mesh,
                         const PatternLabeling& labeling,
                         PlyEncoding encoding = PlyEncoding::BinaryLittleEndian);

// Recover a labeling from per-face palette colors (inverse of
// export_labeled_mesh for labels <= 15).
std::optional<PatternLabeling> labeling_from_colors(const std::vector<Rgb>& face_colors);

} // namespace relief
