#include "dawmr/volume.hpp"

#include <algorithm>
#include <sstream>

namespace dawmr {

Box Box::intersect(const Box& b) const {
  Box out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = std::max(lo[a], b.lo[a]);
    out.hi[a] = std::max(out.lo[a], std::min(hi[a], b.hi[a]));
  }
  return out;
}

Box Box::grown(std::int64_t margin) const {
  Box out = *this;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] -= margin;
    out.hi[a] += margin;
  }
  return out;
}

std::string to_string(const Box& box) {
  std::ostringstream os;
  os << "[" << box.lo.x << "," << box.lo.y << "," << box.lo.z << ")-[" << box.hi.x << "," << box.hi.y
     << "," << box.hi.z << ")";
  return os.str();
}

}  // namespace dawmr
