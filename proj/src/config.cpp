#include "rida/config.hpp"

#include "rida/errors.hpp"

namespace rida {

bool is_known_dataset(const std::string& name) { return name == "cora" || name == "citeseer" || name == "cora-ml"; }

RunConfig RunConfig::defaults_for(const std::string& dataset_name) {
  RunConfig cfg;
  cfg.dataset_name = dataset_name;
  cfg.propagation.K = dataset_name == "citeseer" ? 8 : 16;
  cfg.propagation.delta = dataset_name == "cora-ml" ? 0.2 : 0.1;
  cfg.propagation.gamma = 0.01;
  cfg.propagation.omega = 0.9;
  return cfg;
}

void RunConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("--alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("--beta must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("--epsilon must lie in (0, 1)");
  if (!(label_fraction > 0.0 && label_fraction < 1.0)) throw ValidationError("--label-fraction must lie in (0, 1)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("--eta must lie in [0, 1]");
  if (propagation.K < 1) throw ValidationError("--K must be at least 1");
  if (!(propagation.delta >= 0.0)) throw ValidationError("--delta must be non-negative");
  if (!(propagation.gamma >= 0.0 && propagation.gamma < 1.0)) throw ValidationError("--gamma must lie in [0, 1)");
  if (!(propagation.omega >= 0.0 && propagation.omega <= 1.0)) throw ValidationError("--omega must lie in [0, 1]");
  if (head_epochs < 0 || surrogate_epochs < 0 || target.epochs < 0) throw ValidationError("epoch counts must be >= 0");
  if (hidden < 1 || target.hidden < 1) throw ValidationError("hidden width must be >= 1");
  if (runs < 1) throw ValidationError("--runs must be >= 1");
}

std::string to_string(Optimizer optimizer) { return optimizer == Optimizer::adam ? "adam" : "gd"; }

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "gd") return Optimizer::gradient_descent;
  throw ValidationError("--optimizer must be 'adam' or 'gd'");
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"dataset", dataset_name},
      {"dataset_dir", dataset_dir.string()},
      {"mask_file", mask_file.string()},
      {"alpha", alpha},
      {"beta", beta},
      {"epsilon", epsilon},
      {"label_fraction", label_fraction},
      {"K", propagation.K},
      {"delta", propagation.delta},
      {"gamma", propagation.gamma},
      {"omega", propagation.omega},
      {"global_attention", propagation.use_global_attention},
      {"local_attention", propagation.use_local_attention},
      {"bfp", propagation.use_bfp},
      {"eta", eta},
      {"feature_optimization", use_feature_optimization},
      {"head_epochs", head_epochs},
      {"head_lr", head_lr},
      {"surrogate_epochs", surrogate_epochs},
      {"surrogate_lr", surrogate_lr},
      {"hidden", hidden},
      {"optimizer", to_string(optimizer)},
      {"warm_start", warm_start},
      {"target", {{"hidden", target.hidden}, {"lr", target.learning_rate}, {"epochs", target.epochs},
                  {"optimizer", to_string(target.optimizer)}}},
      {"runs", runs},
      {"reattack", reattack},
      {"seeds", {{"mask", mask_seed}, {"split", split_seed}, {"attack", attack_seed}, {"target", target_seed}}},
  };
}

}  // namespace rida
