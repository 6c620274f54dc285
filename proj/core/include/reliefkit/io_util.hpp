#pragma once

#include <string>

namespace relief {

// Shortest round-trippable decimal form ("%.9g" widened as needed so the
// value parses back bit-exact). Used for every numeric field we write, so
// outputs are byte-stable across runs and platforms.
std::string fmt_double(double value);

std::string read_file(const std::string& path);

// Write to a temp file in the same directory, then rename over the target,
// so readers never observe a partially written file.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace relief
