#include "charonette/geometry.hpp"

namespace charonette {

bool Box::fits(int canvas_width, int canvas_height) const {
  return well_formed() && xmin >= 0 && ymin >= 0 && xmax <= canvas_width && ymax <= canvas_height;
}

std::string to_string(const Box& box) {
  return "[" + std::to_string(box.xmin) + "," + std::to_string(box.ymin) + "," + std::to_string(box.xmax) + "," +
         std::to_string(box.ymax) + ")";
}

}  // namespace charonette
