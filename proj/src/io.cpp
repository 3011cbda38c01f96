#include "annotator/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "annotator/errors.hpp"

namespace annotator {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failed for " + path.string());
  }
  return buffer.str();
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path parent = path.parent_path().empty() ? fs::path(".")
                                                     : path.parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);

  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.string().c_str());
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.string().c_str());
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

}  // namespace annotator
