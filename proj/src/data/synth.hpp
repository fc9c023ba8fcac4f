#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data/point_view.hpp"
#include "data/sampling.hpp"

namespace pcsod {

enum class ObjectKind { Sphere, Box, Torus, Composite };

std::string to_string(ObjectKind kind);
ObjectKind parse_object_kind(const std::string& name);

struct SceneRecipe {
  std::uint64_t seed = 0;
  ObjectKind object_kind = ObjectKind::Sphere;
  double fraction = 0.1;       // share of points on the salient object, in (0,1)
  int clutter = 3;             // distractor objects
  double illumination = 1.0;   // global color gain

  void validate() const;
};

// key=value text, keys exactly {seed, object_kind, fraction, clutter, illumination}.
SceneRecipe parse_recipe(const std::string& text);
std::string format_recipe(const SceneRecipe& recipe);

struct Aabb {
  Vec3 lo;
  Vec3 hi;
  bool contains(const Vec3& p, double tol = 0.0) const {
    for (int c = 0; c < 3; ++c) {
      if (p[c] < lo[c] - tol || p[c] > hi[c] + tol) return false;
    }
    return true;
  }
};

struct Primitive {
  enum class Shape { Sphere, Box, Torus, Cylinder } shape = Shape::Sphere;
  Vec3 center{};
  Vec3 size{};  // sphere: {r}; box: half extents; torus: {R, r}; cylinder: {r, height}
  Vec3 hsv{};
  // Visible surface area; a face resting on the floor is not part of it.
  double area() const;
  Aabb bounds() const;
  bool on_floor() const;
  // Whether (x, y) lies under a primitive resting on the floor.
  bool covers(double x, double y) const;
};

// Deterministic placement of every surface in a scene.
struct SceneLayout {
  SceneRecipe recipe;
  std::vector<Primitive> salient;
  std::vector<Primitive> clutter;
  Aabb salient_bounds;
};

inline constexpr std::size_t kDefaultScenePoints = 16384;

SceneLayout plan_scene(const SceneRecipe& recipe);

// Floor, back and side wall, clutter and one salient object. Surfaces hidden
// by floor contact (box bottoms, floor under objects) are not sampled. Labels
// mark the salient object's points exactly; positions are float-representable
// and colors are multiples of 1/255.
PointView generate_scene(const SceneRecipe& recipe, std::size_t points = kDefaultScenePoints);

// Recipe with randomized kind, fraction, clutter, and illumination.
SceneRecipe random_recipe(std::uint64_t seed);

}  // namespace pcsod
