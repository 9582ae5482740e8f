#include "intimacy/common/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "intimacy/common/error.hpp"

namespace intimacy::io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("io_error", "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace intimacy::io
