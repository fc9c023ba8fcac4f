#include "data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "common/error.hpp"
#include "common/kv.hpp"

namespace pcsod {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRoom = 4.0;
constexpr double kWallHeight = 3.0;

Vec3 hsv_to_rgb(const Vec3& hsv) {
  const double h = std::fmod(hsv[0], 1.0) * 6.0;
  const double s = hsv[1];
  const double v = hsv[2];
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Vec3 sample_surface(const Primitive& prim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto& c = prim.center;
  switch (prim.shape) {
    case Primitive::Shape::Sphere: {
      Vec3 d{g(rng), g(rng), g(rng)};
      const double len = std::max(1e-12, std::hypot(d[0], d[1], d[2]));
      const double r = prim.size[0];
      return {c[0] + r * d[0] / len, c[1] + r * d[1] / len, c[2] + r * d[2] / len};
    }
    case Primitive::Shape::Box: {
      // Face pairs weighted by area; the bottom face of a box on the floor is
      // hidden, leaving only the top of the z pair.
      const auto& h = prim.size;
      const bool open_bottom = prim.on_floor();
      const double a_yz = h[1] * h[2], a_xz = h[0] * h[2], a_xy = open_bottom ? h[0] * h[1] / 2 : h[0] * h[1];
      const double pick = u(rng) * (a_yz + a_xz + a_xy);
      const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
      const double s = 2 * u(rng) - 1, t = 2 * u(rng) - 1;
      if (pick < a_yz) return {c[0] + sign * h[0], c[1] + s * h[1], c[2] + t * h[2]};
      if (pick < a_yz + a_xz) return {c[0] + s * h[0], c[1] + sign * h[1], c[2] + t * h[2]};
      return {c[0] + s * h[0], c[1] + t * h[1], c[2] + (open_bottom ? 1.0 : sign) * h[2]};
    }
    case Primitive::Shape::Torus: {
      // Ring standing upright in the x-z plane; rejection on the tube angle
      // makes the density uniform over the surface.
      const double big = prim.size[0], small = prim.size[1];
      double v = 0;
      while (true) {
        v = 2 * kPi * u(rng);
        if (u(rng) * (big + small) <= big + small * std::cos(v)) break;
      }
      const double w = 2 * kPi * u(rng);
      const double radial = big + small * std::cos(v);
      return {c[0] + radial * std::cos(w), c[1] + small * std::sin(v), c[2] + radial * std::sin(w)};
    }
    case Primitive::Shape::Cylinder: {
      const double r = prim.size[0], height = prim.size[1];
      const double side = 2 * kPi * r * height, cap = kPi * r * r;
      const double w = 2 * kPi * u(rng);
      if (u(rng) * (side + cap) < side) {
        return {c[0] + r * std::cos(w), c[1] + r * std::sin(w), c[2] - height / 2 + height * u(rng)};
      }
      const double rr = r * std::sqrt(u(rng));
      return {c[0] + rr * std::cos(w), c[1] + rr * std::sin(w), c[2] + height / 2};
    }
  }
  return c;
}

struct Surface {
  enum class Kind { Floor, BackWall, SideWall } kind;
  double area;
};

// Floor points under an object resting on the floor are hidden and redrawn.
Vec3 sample_background(const Surface& s, const std::vector<Primitive>& resting, Rng& rng) {
  std::uniform_real_distribution<double> u(-kRoom, kRoom);
  std::uniform_real_distribution<double> h(0.0, kWallHeight);
  switch (s.kind) {
    case Surface::Kind::Floor:
      while (true) {
        const double x = u(rng), y = u(rng);
        if (std::none_of(resting.begin(), resting.end(), [&](const Primitive& p) { return p.covers(x, y); })) {
          return {x, y, 0.0};
        }
      }
    case Surface::Kind::BackWall: return {u(rng), kRoom, h(rng)};
    case Surface::Kind::SideWall: return {-kRoom, u(rng), h(rng)};
  }
  return {0, 0, 0};
}

double quantize_color(double c) { return std::round(std::clamp(c, 0.0, 1.0) * 255.0) / 255.0; }

Vec3 to_float_grid(const Vec3& p) {
  return {static_cast<double>(static_cast<float>(p[0])), static_cast<double>(static_cast<float>(p[1])),
          static_cast<double>(static_cast<float>(p[2]))};
}

// Split `total` across weights; every part gets at least one point.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  std::vector<std::size_t> out(weights.size(), 1);
  if (weights.empty()) return out;
  const std::size_t base = weights.size();
  const std::size_t rest = total > base ? total - base : 0;
  double sum = 0;
  for (double w : weights) sum += w;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto share = static_cast<std::size_t>(std::floor(rest * weights[i] / sum));
    out[i] += share;
    assigned += share;
  }
  for (std::size_t i = 0; assigned < rest; i = (i + 1) % out.size(), ++assigned) ++out[i];
  return out;
}

}  // namespace

std::string to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::Sphere: return "sphere";
    case ObjectKind::Box: return "box";
    case ObjectKind::Torus: return "torus";
    case ObjectKind::Composite: return "composite";
  }
  return "sphere";
}

ObjectKind parse_object_kind(const std::string& name) {
  if (name == "sphere") return ObjectKind::Sphere;
  if (name == "box") return ObjectKind::Box;
  if (name == "torus") return ObjectKind::Torus;
  if (name == "composite") return ObjectKind::Composite;
  throw_usage("unknown object_kind '" + name + "'");
}

void SceneRecipe::validate() const {
  if (!(fraction > 0.0 && fraction < 1.0)) throw_usage("recipe fraction must lie in (0,1)");
  if (clutter < 0) throw_usage("recipe clutter must be non-negative");
  if (!(illumination > 0.0)) throw_usage("recipe illumination must be positive");
}

SceneRecipe parse_recipe(const std::string& text) {
  static const char* kKeys[] = {"seed", "object_kind", "fraction", "clutter", "illumination"};
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw_usage("recipe line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw_usage("unknown recipe key '" + key + "'");
    }
    values[key] = trim(line.substr(eq + 1));
  }
  for (const char* key : kKeys) {
    if (!values.count(key)) throw_usage("missing recipe key '" + std::string(key) + "'");
  }
  SceneRecipe r;
  try {
    r.seed = std::stoull(values["seed"]);
    r.object_kind = parse_object_kind(values["object_kind"]);
    r.fraction = std::stod(values["fraction"]);
    r.clutter = std::stoi(values["clutter"]);
    r.illumination = std::stod(values["illumination"]);
  } catch (const std::logic_error&) {
    throw_usage("malformed recipe value");
  }
  r.validate();
  return r;
}

std::string format_recipe(const SceneRecipe& r) {
  std::ostringstream out;
  out << "seed=" << r.seed << "\n"
      << "object_kind=" << to_string(r.object_kind) << "\n"
      << "fraction=" << format_real(r.fraction) << "\n"
      << "clutter=" << r.clutter << "\n"
      << "illumination=" << format_real(r.illumination) << "\n";
  return out.str();
}

double Primitive::area() const {
  switch (shape) {
    case Shape::Sphere: return 4 * kPi * size[0] * size[0];
    case Shape::Box:
      return 8 * (size[0] * size[1] + size[1] * size[2] + size[0] * size[2]) - (on_floor() ? 4 * size[0] * size[1] : 0);
    case Shape::Torus: return 4 * kPi * kPi * size[0] * size[1];
    case Shape::Cylinder: return 2 * kPi * size[0] * size[1] + kPi * size[0] * size[0];
  }
  return 0;
}

bool Primitive::on_floor() const {
  return (shape == Shape::Box || shape == Shape::Cylinder) && bounds().lo[2] <= 1e-9;
}

bool Primitive::covers(double x, double y) const {
  if (!on_floor()) return false;
  if (shape == Shape::Box) return std::abs(x - center[0]) <= size[0] && std::abs(y - center[1]) <= size[1];
  return std::hypot(x - center[0], y - center[1]) <= size[0];
}

Aabb Primitive::bounds() const {
  const auto& c = center;
  switch (shape) {
    case Shape::Sphere: {
      const double r = size[0];
      return {{c[0] - r, c[1] - r, c[2] - r}, {c[0] + r, c[1] + r, c[2] + r}};
    }
    case Shape::Box:
      return {{c[0] - size[0], c[1] - size[1], c[2] - size[2]}, {c[0] + size[0], c[1] + size[1], c[2] + size[2]}};
    case Shape::Torus: {
      const double outer = size[0] + size[1];
      return {{c[0] - outer, c[1] - size[1], c[2] - outer}, {c[0] + outer, c[1] + size[1], c[2] + outer}};
    }
    case Shape::Cylinder: {
      const double r = size[0], hh = size[1] / 2;
      return {{c[0] - r, c[1] - r, c[2] - hh}, {c[0] + r, c[1] + r, c[2] + hh}};
    }
  }
  return {c, c};
}

SceneLayout plan_scene(const SceneRecipe& recipe) {
  recipe.validate();
  Rng rng(recipe.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SceneLayout layout;
  layout.recipe = recipe;

  const Vec3 vivid{u(rng), 0.75 + 0.25 * u(rng), 0.75 + 0.25 * u(rng)};
  const double cx = -1.5 + 3.0 * u(rng);
  const double cy = -1.5 + 3.0 * u(rng);
  const double scale = 0.6 + 0.4 * u(rng);

  Primitive main;
  main.hsv = vivid;
  switch (recipe.object_kind) {
    case ObjectKind::Sphere:
      main.shape = Primitive::Shape::Sphere;
      main.size = {scale, 0, 0};
      main.center = {cx, cy, scale};
      layout.salient.push_back(main);
      break;
    case ObjectKind::Box:
      main.shape = Primitive::Shape::Box;
      main.size = {scale * (0.6 + 0.4 * u(rng)), scale * (0.6 + 0.4 * u(rng)), scale * (0.6 + 0.4 * u(rng))};
      main.center = {cx, cy, main.size[2]};
      layout.salient.push_back(main);
      break;
    case ObjectKind::Torus:
      main.shape = Primitive::Shape::Torus;
      main.size = {scale, 0.3 * scale, 0};
      main.center = {cx, cy, 1.3 * scale};
      layout.salient.push_back(main);
      break;
    case ObjectKind::Composite: {
      Primitive base;
      base.shape = Primitive::Shape::Box;
      base.hsv = vivid;
      base.size = {0.6 * scale, 0.6 * scale, 0.4 * scale};
      base.center = {cx, cy, base.size[2]};
      Primitive top;
      top.shape = Primitive::Shape::Sphere;
      top.hsv = vivid;
      top.size = {0.5 * scale, 0, 0};
      top.center = {cx, cy, 2 * base.size[2] + top.size[0]};
      layout.salient.push_back(base);
      layout.salient.push_back(top);
      break;
    }
  }

  layout.salient_bounds = layout.salient.front().bounds();
  for (const auto& p : layout.salient) {
    const Aabb b = p.bounds();
    for (int c = 0; c < 3; ++c) {
      layout.salient_bounds.lo[c] = std::min(layout.salient_bounds.lo[c], b.lo[c]);
      layout.salient_bounds.hi[c] = std::max(layout.salient_bounds.hi[c], b.hi[c]);
    }
  }

  // Muted distractors placed away from the salient object.
  for (int i = 0; i < recipe.clutter; ++i) {
    Primitive p;
    p.shape = u(rng) < 0.5 ? Primitive::Shape::Box : Primitive::Shape::Cylinder;
    p.hsv = {u(rng), 0.05 + 0.25 * u(rng), 0.35 + 0.45 * u(rng)};
    double x = 0, y = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      x = -3.3 + 6.6 * u(rng);
      y = -3.3 + 6.6 * u(rng);
      if (std::hypot(x - cx, y - cy) > 2.0) break;
    }
    if (p.shape == Primitive::Shape::Box) {
      p.size = {0.2 + 0.4 * u(rng), 0.2 + 0.4 * u(rng), 0.2 + 0.5 * u(rng)};
      p.center = {x, y, p.size[2]};
    } else {
      p.size = {0.15 + 0.3 * u(rng), 0.4 + 1.2 * u(rng), 0};
      p.center = {x, y, p.size[1] / 2};
    }
    layout.clutter.push_back(p);
  }
  return layout;
}

PointView generate_scene(const SceneRecipe& recipe, std::size_t points) {
  if (points < 16) throw_usage("scene needs at least 16 points");
  const SceneLayout layout = plan_scene(recipe);
  // Separate stream so the layout is independent of the point budget.
  Rng rng(recipe.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);

  const auto salient_total = std::max<std::size_t>(
      layout.salient.size(), static_cast<std::size_t>(std::llround(recipe.fraction * static_cast<double>(points))));
  const std::size_t rest = points - std::min(points - 8, salient_total);
  const std::size_t clutter_total = layout.clutter.empty() ? 0 : rest / 4;

  PointView view;
  view.scene_id = "synthetic";
  view.view_id = "seed" + std::to_string(recipe.seed);
  view.positions.reserve(points);
  view.colors.reserve(points);
  std::vector<std::uint8_t> labels;
  labels.reserve(points);

  auto emit = [&](const Vec3& p, const Vec3& rgb, std::uint8_t label) {
    view.positions.push_back(to_float_grid(p));
    Vec3 c;
    for (int k = 0; k < 3; ++k) c[k] = quantize_color(rgb[k] * recipe.illumination + jitter(rng));
    view.colors.push_back(c);
    labels.push_back(label);
  };
  auto emit_primitives = [&](const std::vector<Primitive>& prims, std::size_t total, std::uint8_t label) {
    if (prims.empty()) return;
    std::vector<double> areas;
    for (const auto& p : prims) areas.push_back(p.area());
    const auto counts = apportion(total, areas);
    for (std::size_t i = 0; i < prims.size(); ++i) {
      const Vec3 rgb = hsv_to_rgb(prims[i].hsv);
      for (std::size_t k = 0; k < counts[i]; ++k) emit(sample_surface(prims[i], rng), rgb, label);
    }
  };

  emit_primitives(layout.salient, std::min(points - 8, salient_total), 1);
  emit_primitives(layout.clutter, clutter_total, 0);

  std::vector<Primitive> resting;
  double footprint = 0.0;
  for (const auto* group : {&layout.salient, &layout.clutter}) {
    for (const auto& p : *group) {
      if (!p.on_floor()) continue;
      resting.push_back(p);
      footprint += p.shape == Primitive::Shape::Box ? 4 * p.size[0] * p.size[1] : kPi * p.size[0] * p.size[0];
    }
  }
  const std::vector<Surface> surfaces = {
      {Surface::Kind::Floor, std::max(0.5 * 4 * kRoom * kRoom, 4 * kRoom * kRoom - footprint)},
      {Surface::Kind::BackWall, 2 * kRoom * kWallHeight},
      {Surface::Kind::SideWall, 2 * kRoom * kWallHeight},
  };
  const Vec3 surface_rgb[] = {hsv_to_rgb({0.08, 0.15, 0.55}), hsv_to_rgb({0.6, 0.05, 0.75}),
                              hsv_to_rgb({0.12, 0.08, 0.65})};
  std::vector<double> areas;
  for (const auto& s : surfaces) areas.push_back(s.area);
  const std::size_t background_left = points - view.size();
  const auto counts = apportion(background_left, areas);
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    for (std::size_t k = 0; k < counts[i]; ++k) emit(sample_background(surfaces[i], resting, rng), surface_rgb[i], 0);
  }

  view.labels = std::move(labels);
  return view;
}

SceneRecipe random_recipe(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SceneRecipe r;
  r.seed = seed;
  r.object_kind = static_cast<ObjectKind>(std::uniform_int_distribution<int>(0, 3)(rng));
  r.fraction = 0.06 + 0.14 * u(rng);
  r.clutter = std::uniform_int_distribution<int>(2, 6)(rng);
  r.illumination = 0.75 + 0.35 * u(rng);
  return r;
}

}  // namespace pcsod
