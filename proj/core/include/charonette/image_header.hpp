#pragma once

#include <string>
#include <string_view>

namespace charonette {

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Reads the frame dimensions from a JPEG's SOF segment without decoding
// pixel data. Throws Error(unreadable_image).
ImageSize jpeg_dimensions(std::string_view bytes);

// Smallest byte sequence jpeg_dimensions() accepts: SOI, one SOF0 segment
// with three components, EOI. Used for synthetic corpora.
std::string minimal_jpeg_header(int width, int height);

}  // namespace charonette
