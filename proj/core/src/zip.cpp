#include "charonette/zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>

#include "charonette/error.hpp"

namespace charonette {

namespace {

constexpr std::uint32_t kLocalHeader = 0x04034b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;

[[noreturn]] void bad_zip(const std::string& what) {
  throw Error(ErrorCode::parse_error, "not a readable ZIP archive: " + what);
}

std::uint16_t u16(std::string_view data, std::size_t at) {
  if (at + 2 > data.size()) bad_zip("truncated record");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(data[at]) |
                                    (static_cast<unsigned char>(data[at + 1]) << 8));
}

std::uint32_t u32(std::string_view data, std::size_t at) {
  return static_cast<std::uint32_t>(u16(data, at)) | (static_cast<std::uint32_t>(u16(data, at + 2)) << 16);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t offset = 0;
  while (offset < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string inflate_raw(std::string_view compressed, std::size_t expected_size) {
  std::string out(expected_size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) bad_zip("inflate init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected_size) bad_zip("corrupt deflate stream");
  return out;
}

std::string deflate_raw(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::io_error, "deflate init failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::io_error, "deflate failed");
  return out;
}

}  // namespace

std::vector<ZipEntry> read_zip(std::string_view archive) {
  if (archive.size() < 22) bad_zip("too short");
  // The end-of-central-directory record sits within the last 64 KiB + 22 bytes.
  std::size_t eocd = std::string_view::npos;
  const std::size_t floor = archive.size() > 65557 ? archive.size() - 65557 : 0;
  for (std::size_t at = archive.size() - 22 + 1; at-- > floor;) {
    if (u32(archive, at) == kEndOfCentralDir) {
      eocd = at;
      break;
    }
  }
  if (eocd == std::string_view::npos) bad_zip("end of central directory not found");

  const std::uint16_t count = u16(archive, eocd + 10);
  const std::uint32_t dir_offset = u32(archive, eocd + 16);
  if (dir_offset == 0xFFFFFFFF || count == 0xFFFF) bad_zip("ZIP64 archives are not supported");

  std::vector<ZipEntry> entries;
  std::size_t at = dir_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (u32(archive, at) != kCentralHeader) bad_zip("bad central directory entry");
    const std::uint16_t flags = u16(archive, at + 8);
    const std::uint16_t method = u16(archive, at + 10);
    const std::uint32_t crc = u32(archive, at + 16);
    const std::uint32_t compressed_size = u32(archive, at + 20);
    const std::uint32_t size = u32(archive, at + 24);
    const std::uint16_t name_len = u16(archive, at + 28);
    const std::uint16_t extra_len = u16(archive, at + 30);
    const std::uint16_t comment_len = u16(archive, at + 32);
    const std::uint32_t local = u32(archive, at + 42);
    if (at + 46 + name_len > archive.size()) bad_zip("truncated central directory");
    std::string name(archive.substr(at + 46, name_len));
    at += 46 + name_len + extra_len + comment_len;

    if (flags & 0x1) bad_zip("encrypted member " + name);
    if (!name.empty() && name.back() == '/') continue;

    if (u32(archive, local) != kLocalHeader) bad_zip("bad local header for " + name);
    const std::size_t data_at = local + 30 + u16(archive, local + 26) + u16(archive, local + 28);
    if (data_at + compressed_size > archive.size()) bad_zip("truncated member " + name);
    std::string_view payload = archive.substr(data_at, compressed_size);

    ZipEntry entry{std::move(name), {}};
    if (method == 0) {
      entry.data = std::string(payload);
    } else if (method == 8) {
      entry.data = inflate_raw(payload, size);
    } else {
      bad_zip("unsupported compression method " + std::to_string(method) + " for " + entry.name);
    }
    if (entry.data.size() != size || crc_of(entry.data) != crc) bad_zip("CRC mismatch in " + entry.name);
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string write_zip(std::span<const ZipEntry> entries) {
  std::string out;
  std::string directory;
  for (const auto& entry : entries) {
    const std::string compressed = deflate_raw(entry.data);
    const std::uint32_t crc = crc_of(entry.data);
    const auto offset = static_cast<std::uint32_t>(out.size());

    put32(out, kLocalHeader);
    put16(out, 20);  // version needed
    put16(out, 0x0800);  // UTF-8 names
    put16(out, 8);
    put16(out, 0);  // time
    put16(out, 0x21);  // date: 1980-01-01
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(compressed.size()));
    put32(out, static_cast<std::uint32_t>(entry.data.size()));
    put16(out, static_cast<std::uint16_t>(entry.name.size()));
    put16(out, 0);
    out += entry.name;
    out += compressed;

    put32(directory, kCentralHeader);
    put16(directory, 20);
    put16(directory, 20);
    put16(directory, 0x0800);
    put16(directory, 8);
    put16(directory, 0);
    put16(directory, 0x21);
    put32(directory, crc);
    put32(directory, static_cast<std::uint32_t>(compressed.size()));
    put32(directory, static_cast<std::uint32_t>(entry.data.size()));
    put16(directory, static_cast<std::uint16_t>(entry.name.size()));
    put16(directory, 0);
    put16(directory, 0);
    put16(directory, 0);
    put16(directory, 0);
    put32(directory, 0);
    put32(directory, offset);
    directory += entry.name;
  }
  const auto dir_offset = static_cast<std::uint32_t>(out.size());
  out += directory;
  put32(out, kEndOfCentralDir);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(directory.size()));
  put32(out, dir_offset);
  put16(out, 0);
  return out;
}

}  // namespace charonette
