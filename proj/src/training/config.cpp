#include "training/config.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/kv.hpp"

namespace pcsod::training {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw_usage("lr must be a finite non-negative number");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw_usage("weight_decay must be non-negative");
  if (epochs == 0) throw_usage("epochs must be positive");
  if (batch_size == 0) throw_usage("batch_size must be positive");
  if (block_size == 0 || block_size % model::kBlockMultiple != 0) {
    throw_usage("block_size must be a positive multiple of " + std::to_string(model::kBlockMultiple));
  }
  if (votes == 0) throw_usage("votes must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw_usage("lr_decay must be in (0, 1]");
}

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k = {"lr",    "weight_decay",     "epochs",   "batch_size",
                                             "block_size", "seed",      "votes",    "checkpoint_every",
                                             "lr_decay",   "max_steps", "augment"};
  return k;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  model.validate_block(train.block_size);
}

RunConfig parse_run_config(const std::string& text) {
  const auto values = parse_key_values(text);
  std::vector<std::string> keys = model::ModelConfig::keys();
  keys.insert(keys.end(), TrainConfig::keys().begin(), TrainConfig::keys().end());
  require_exact_keys(values, keys, "config");

  RunConfig c;
  c.model = model::model_config_from(values);
  auto& t = c.train;
  t.lr = parse_real("lr", values.at("lr"));
  t.weight_decay = parse_real("weight_decay", values.at("weight_decay"));
  t.epochs = parse_size("epochs", values.at("epochs"));
  t.batch_size = parse_size("batch_size", values.at("batch_size"));
  t.block_size = parse_size("block_size", values.at("block_size"));
  t.seed = parse_size("seed", values.at("seed"));
  t.votes = parse_size("votes", values.at("votes"));
  t.checkpoint_every = parse_size("checkpoint_every", values.at("checkpoint_every"));
  t.lr_decay = parse_real("lr_decay", values.at("lr_decay"));
  t.max_steps = parse_size("max_steps", values.at("max_steps"));
  t.augment = parse_bool("augment", values.at("augment"));
  c.validate();
  return c;
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  const auto& t = c.train;
  out << model::format_model_config(c.model) << "lr=" << format_real(t.lr) << "\n"
      << "weight_decay=" << format_real(t.weight_decay) << "\n"
      << "epochs=" << t.epochs << "\n"
      << "batch_size=" << t.batch_size << "\n"
      << "block_size=" << t.block_size << "\n"
      << "seed=" << t.seed << "\n"
      << "votes=" << t.votes << "\n"
      << "checkpoint_every=" << t.checkpoint_every << "\n"
      << "lr_decay=" << format_real(t.lr_decay) << "\n"
      << "max_steps=" << t.max_steps << "\n"
      << "augment=" << (t.augment ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace pcsod::training
