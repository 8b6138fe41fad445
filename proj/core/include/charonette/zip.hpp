#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace charonette {

struct ZipEntry {
  std::string name;
  std::string data;

  friend bool operator==(const ZipEntry&, const ZipEntry&) = default;
};

// Reads stored and deflated members of a (non-ZIP64) archive, verifying CRCs.
// Directory members are skipped. Throws Error(parse_error).
std::vector<ZipEntry> read_zip(std::string_view archive);

// Writes deflated members with zeroed timestamps so output is reproducible.
std::string write_zip(std::span<const ZipEntry> entries);

}  // namespace charonette
