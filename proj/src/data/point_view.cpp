#include "data/point_view.hpp"

#include <cmath>

#include "common/error.hpp"

namespace pcsod {

void PointView::validate() const {
  if (positions.empty()) throw_data("view has no points");
  if (colors.size() != positions.size()) throw_data("color count does not match point count");
  if (labels && labels->size() != positions.size())
    throw_data("label count does not match point count");
  for (const auto& p : positions) {
    for (double c : p) {
      if (!std::isfinite(c)) throw_data("non-finite coordinate");
    }
  }
  for (const auto& c : colors) {
    for (double v : c) {
      if (!(v >= 0.0 && v <= 1.0)) throw_data("color outside [0,1]");
    }
  }
  if (labels) {
    for (auto l : *labels) {
      if (l > 1) throw_data("label outside {0,1}");
    }
  }
}

}  // namespace pcsod
