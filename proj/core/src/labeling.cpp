#include "reliefkit/labeling.hpp"

#include "reliefkit/io_util.hpp"
#include "reliefkit/mesh.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace relief {

const std::array<Rgb, 16>& label_palette() {
    static const std::array<Rgb, 16> palette = {{
        {128, 128, 128}, // 0 plain
        {230, 25, 75},   // 1
        {60, 180, 75},   // 2
        {255, 225, 25},  // 3
        {0, 130, 200},   // 4
        {245, 130, 48},  // 5
        {145, 30, 180},  // 6
        {70, 240, 240},  // 7
        {240, 50, 230},  // 8
        {210, 245, 60},  // 9
        {250, 190, 190}, // 10
        {0, 128, 128},   // 11
        {170, 110, 40},  // 12
        {255, 250, 200}, // 13
        {128, 0, 0},     // 14
        {0, 0, 128},     // 15
    }};
    return palette;
}

Rgb label_color(std::uint32_t label) {
    const auto& palette = label_palette();
    if (label == 0) return palette[0];
    return palette[1 + (label - 1) % 15];
}

bool color_to_label(const Rgb& color, std::uint32_t& label) {
    const auto& palette = label_palette();
    for (std::uint32_t i = 0; i < palette.size(); ++i) {
        if (palette[i] == color) {
            label = i;
            return true;
        }
    }
    return false;
}

std::string labeling_to_csv(const PatternLabeling& labeling) {
    std::ostringstream out;
    const bool with_conf = labeling.has_confidences();
    out << (with_conf ? "face_id,label,confidence\n" : "face_id,label\n");
    for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
        out << i << ',' << labeling.labels[i];
        if (with_conf) out << ',' << fmt_double(labeling.confidences[i]);
        out << '\n';
    }
    return out.str();
}

PatternLabeling labeling_from_csv(const std::string& text) {
    PatternLabeling labeling;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("labeling csv: empty file");
    const bool with_conf = line.find("confidence") != std::string::npos;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        char* end = nullptr;
        unsigned long face_id = std::strtoul(line.c_str(), &end, 10);
        if (end == line.c_str() || *end != ',')
            throw Error("labeling csv: malformed row " + std::to_string(row));
        if (face_id != row)
            throw Error("labeling csv: non-sequential face id at row " + std::to_string(row));
        const char* rest = end + 1;
        unsigned long label = std::strtoul(rest, &end, 10);
        if (end == rest) throw Error("labeling csv: malformed label at row " + std::to_string(row));
        labeling.labels.push_back(static_cast<std::uint32_t>(label));
        if (with_conf) {
            if (*end != ',') throw Error("labeling csv: missing confidence at row " + std::to_string(row));
            labeling.confidences.push_back(std::strtod(end + 1, nullptr));
        }
        ++row;
    }
    return labeling;
}

void save_labeling(const std::string& path, const PatternLabeling& labeling) {
    write_file_atomic(path, labeling_to_csv(labeling));
}

PatternLabeling load_labeling(const std::string& path) {
    return labeling_from_csv(read_file(path));
}

} // namespace relief
