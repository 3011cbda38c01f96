#pragma once

#include <filesystem>
#include <string>

namespace annotator {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place so readers never
// observe a partially written file.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace annotator
