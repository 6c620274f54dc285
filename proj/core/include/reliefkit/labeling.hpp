#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// Per-face pattern labeling. Label 0 is reserved for unpatterned ("plain")
// surface; labels >= 1 identify pattern classes from the catalog.
struct PatternLabeling {
    std::vector<std::uint32_t> labels;            // one per face
    std::vector<double> confidences;              // optional, one per face when non-empty
    std::vector<std::string> catalog;             // catalog[i] names label i (optional)

    bool has_confidences() const { return !confidences.empty(); }
};

using Rgb = std::array<std::uint8_t, 3>;

// Fixed 16-entry color palette. Entry 0 (plain) is neutral gray; entries
// 1..15 are distinct saturated colors. Labels above 15 wrap onto 1..15.
const std::array<Rgb, 16>& label_palette();

Rgb label_color(std::uint32_t label);

// Inverse palette lookup; returns false if the color is not a palette entry.
bool color_to_label(const Rgb& color, std::uint32_t& label);

// CSV round-trip: header "face_id,label" or "face_id,label,confidence",
// one row per face in face order.
std::string labeling_to_csv(const PatternLabeling& labeling);
PatternLabeling labeling_from_csv(const std::string& text);

void save_labeling(const std::string& path, const PatternLabeling& labeling);
PatternLabeling load_labeling(const std::string& path);

} // namespace relief
