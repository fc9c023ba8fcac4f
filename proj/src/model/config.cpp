#include "model/config.hpp"

#include <sstream>

#include "common/error.hpp"
#include "common/kv.hpp"

namespace pcsod::model {

void PpbConfig::validate(const char* which) const {
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 1) throw_usage(std::string(which) + ": neighbor counts must be >= 1");
    if (i > 0 && k[i] <= k[i - 1]) throw_usage(std::string(which) + ": neighbor counts must be strictly increasing");
  }
}

std::size_t level_points(std::size_t points, std::size_t level) {
  for (std::size_t l = 0; l < level; ++l) points /= kLevelStride;
  return points;
}

void ModelConfig::validate() const {
  if (k_enc < 1) throw_usage("k_enc must be >= 1");
  for (auto d : level_dims) {
    if (d < 2) throw_usage("level_dims entries must be >= 2");
  }
  if (fab_channels < 1 || spb_channels < 1 || head_hidden < 1) throw_usage("channel widths must be positive");
  ppb_semantics.validate("ppb_semantics_k");
  ppb_multiscale.validate("ppb_multiscale_k");
}

void ModelConfig::validate_block(std::size_t points) const {
  validate();
  if (points == 0 || points % kBlockMultiple != 0) {
    throw_data("block size " + std::to_string(points) + " is not divisible by " + std::to_string(kBlockMultiple));
  }
  if (ppb_semantics.max_k() > level_points(points, 4)) {
    throw_data("ppb_semantics needs " + std::to_string(ppb_semantics.max_k()) + " neighbors but level 4 has " +
               std::to_string(level_points(points, 4)) + " points");
  }
  if (ppb_multiscale.max_k() > level_points(points, 1)) {
    throw_data("ppb_multiscale needs " + std::to_string(ppb_multiscale.max_k()) + " neighbors but level 1 has " +
               std::to_string(level_points(points, 1)) + " points");
  }
}

const std::vector<std::string>& ModelConfig::keys() {
  static const std::vector<std::string> k = {"k_enc",          "level_dims", "fab_channels", "ppb_semantics_k",
                                             "ppb_multiscale_k", "reduction",  "spb_channels", "head_hidden",
                                             "batch_norm"};
  return k;
}

std::string format_model_config(const ModelConfig& c) {
  auto list4 = [](const std::array<std::size_t, 4>& a) {
    return join_sizes(std::vector<std::size_t>(a.begin(), a.end()));
  };
  std::ostringstream out;
  out << "k_enc=" << c.k_enc << "\n"
      << "level_dims=" << list4(c.level_dims) << "\n"
      << "fab_channels=" << c.fab_channels << "\n"
      << "ppb_semantics_k=" << list4(c.ppb_semantics.k) << "\n"
      << "ppb_multiscale_k=" << list4(c.ppb_multiscale.k) << "\n"
      << "reduction=" << ad::to_string(c.reduction) << "\n"
      << "spb_channels=" << c.spb_channels << "\n"
      << "head_hidden=" << c.head_hidden << "\n"
      << "batch_norm=" << (c.batch_norm ? "true" : "false") << "\n";
  return out.str();
}

ModelConfig model_config_from(const std::map<std::string, std::string>& values) {
  for (const auto& k : ModelConfig::keys()) {
    if (!values.count(k)) throw_usage("missing config key '" + k + "'");
  }
  auto four = [&](const std::string& key) {
    const auto v = parse_size_list(key, values.at(key));
    if (v.size() != 4) throw_usage("config key '" + key + "': expected 4 comma-separated values");
    return std::array<std::size_t, 4>{v[0], v[1], v[2], v[3]};
  };
  ModelConfig c;
  c.k_enc = parse_size("k_enc", values.at("k_enc"));
  c.level_dims = four("level_dims");
  c.fab_channels = parse_size("fab_channels", values.at("fab_channels"));
  c.ppb_semantics.k = four("ppb_semantics_k");
  c.ppb_multiscale.k = four("ppb_multiscale_k");
  c.reduction = ad::parse_reduction(values.at("reduction"));
  c.spb_channels = parse_size("spb_channels", values.at("spb_channels"));
  c.head_hidden = parse_size("head_hidden", values.at("head_hidden"));
  c.batch_norm = parse_bool("batch_norm", values.at("batch_norm"));
  c.validate();
  return c;
}

ModelConfig parse_model_config(const std::string& text) {
  const auto values = parse_key_values(text);
  require_exact_keys(values, ModelConfig::keys(), "model config");
  return model_config_from(values);
}

}  // namespace pcsod::model
