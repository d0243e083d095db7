#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

namespace detfield {

// 17 significant digits: enough to round-trip any double.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Writes to <path>.tmp and renames over <path>.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace detfield
