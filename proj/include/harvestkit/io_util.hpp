#pragma once

#include <string>

namespace hk {

// Reads a whole file into memory (binary). Missing/unreadable -> IoError.
std::string read_file(const std::string& path);

// Writes to a sibling temp file and renames it into place, so the target
// is never observed half-written.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace hk
