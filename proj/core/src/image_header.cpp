#include "charonette/image_header.hpp"

#include "charonette/error.hpp"

namespace charonette {

namespace {

unsigned byte_at(std::string_view bytes, std::size_t i) { return static_cast<unsigned char>(bytes[i]); }

bool is_sof(unsigned marker) {
  return marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
}

}  // namespace

ImageSize jpeg_dimensions(std::string_view bytes) {
  if (bytes.size() < 4 || byte_at(bytes, 0) != 0xFF || byte_at(bytes, 1) != 0xD8) {
    throw Error(ErrorCode::unreadable_image, "missing JPEG start-of-image marker");
  }
  std::size_t i = 2;
  while (i + 1 < bytes.size()) {
    if (byte_at(bytes, i) != 0xFF) throw Error(ErrorCode::unreadable_image, "corrupt JPEG marker stream");
    while (i < bytes.size() && byte_at(bytes, i) == 0xFF) ++i;  // fill bytes
    if (i >= bytes.size()) break;
    const unsigned marker = byte_at(bytes, i++);
    if (marker == 0xD9 || marker == 0xDA) break;  // EOI / start of scan before any SOF
    if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) continue;
    if (i + 2 > bytes.size()) break;
    const std::size_t length = (byte_at(bytes, i) << 8) | byte_at(bytes, i + 1);
    if (length < 2 || i + length > bytes.size()) break;
    if (is_sof(marker)) {
      if (length < 7) break;
      ImageSize size;
      size.height = static_cast<int>((byte_at(bytes, i + 3) << 8) | byte_at(bytes, i + 4));
      size.width = static_cast<int>((byte_at(bytes, i + 5) << 8) | byte_at(bytes, i + 6));
      if (size.width == 0 || size.height == 0) {
        throw Error(ErrorCode::unreadable_image, "JPEG declares zero width or height");
      }
      return size;
    }
    i += length;
  }
  throw Error(ErrorCode::unreadable_image, "no JPEG frame header found");
}

std::string minimal_jpeg_header(int width, int height) {
  std::string out = {'\xFF', '\xD8', '\xFF', '\xC0', 0x00, 0x11, 0x08};
  out.push_back(static_cast<char>((height >> 8) & 0xFF));
  out.push_back(static_cast<char>(height & 0xFF));
  out.push_back(static_cast<char>((width >> 8) & 0xFF));
  out.push_back(static_cast<char>(width & 0xFF));
  out.push_back(0x03);
  for (char component = 1; component <= 3; ++component) {
    out.push_back(component);
    out.push_back(0x11);
    out.push_back(0x00);
  }
  out += {'\xFF', '\xD9'};
  return out;
}

}  // namespace charonette
