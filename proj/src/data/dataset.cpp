#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "common/error.hpp"
#include "data/ply.hpp"

namespace pcsod {
namespace fs = std::filesystem;

std::string to_string(Split split) { return split == Split::Train ? "train" : "test"; }

std::vector<PointView> load_dataset(const fs::path& root, Split split) {
  const fs::path dir = root / to_string(split);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw_data("missing split directory " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ply") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) throw_data("empty split " + dir.string());

  std::vector<PointView> views;
  views.reserve(files.size());
  for (const auto& f : files) {
    PointView v = load_ply(f);
    if (split == Split::Train && !v.has_labels()) throw_data("train views require labels (" + f.string() + ")");
    views.push_back(std::move(v));
  }
  return views;
}

SynthSummary synthesize_dataset(const fs::path& root, const SynthOptions& options) {
  if (options.views == 0) throw_usage("--views must be positive");
  if (!(options.split_ratio > 0.0 && options.split_ratio <= 1.0)) throw_usage("split ratio must lie in (0,1]");
  SynthSummary summary;
  summary.train = static_cast<std::size_t>(std::llround(options.split_ratio * static_cast<double>(options.views)));
  summary.train = std::min(summary.train, options.views);
  summary.test = options.views - summary.train;
  if (summary.test == 0) throw_usage("empty test split");
  if (summary.train == 0) throw_usage("empty train split");

  std::error_code ec;
  for (const char* sub : {"train", "test", "recipes"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw_data("cannot create " + (root / sub).string() + ": " + ec.message());
  }

  Rng seeds(options.seed);
  for (std::size_t i = 0; i < options.views; ++i) {
    const SceneRecipe recipe = random_recipe(seeds());
    PointView view = generate_scene(recipe, options.points);
    char name[32];
    std::snprintf(name, sizeof(name), "view_%04zu", i);
    view.scene_id = "synthetic";
    view.view_id = name;
    const fs::path dir = root / (i < summary.train ? "train" : "test");
    save_ply(view, dir / (std::string(name) + ".ply"), PlyFormat::BinaryLittleEndian);
    std::ofstream recipe_out(root / "recipes" / (std::string(name) + ".recipe"));
    recipe_out << format_recipe(recipe);
    if (!recipe_out) throw_data("cannot write recipe for " + std::string(name));
  }
  return summary;
}

}  // namespace pcsod
