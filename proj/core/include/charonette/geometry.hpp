#pragma once

#include <string>

namespace charonette {

// Axis-aligned pixel box, half-open: a pixel (x, y) is inside when
// xmin <= x < xmax and ymin <= y < ymax.
struct Box {
  int xmin = 0;
  int ymin = 0;
  int xmax = 0;
  int ymax = 0;

  int width() const { return xmax - xmin; }
  int height() const { return ymax - ymin; }
  bool well_formed() const { return xmin < xmax && ymin < ymax; }
  // Well formed and inside a width x height canvas.
  bool fits(int canvas_width, int canvas_height) const;

  friend bool operator==(const Box&, const Box&) = default;
};

std::string to_string(const Box& box);

}  // namespace charonette
