#pragma once

#include <string>

namespace intimacy::io {

std::string read_file(const std::string& path);

// Writes to a sibling temp file, flushes, then renames over `path`, so a
// failed run never leaves a partially written output behind.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace intimacy::io
