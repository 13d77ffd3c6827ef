#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "rida/dpgnn.hpp"
#include "rida/training.hpp"

namespace rida {

/// Hyperparameters of the evaluated (victim) GCN.
struct TargetConfig {
  int hidden = 16;
  double learning_rate = 0.005;
  int epochs = 200;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
};

/// Everything a reproducible run depends on. All randomness comes from the
/// four seeds.
struct RunConfig {
  std::filesystem::path dataset_dir;
  std::string dataset_name = "cora";
  std::filesystem::path mask_file;  // empty: generate from alpha/beta/mask_seed
  std::filesystem::path output_dir = "out";

  double alpha = 0.3;
  double beta = 0.7;
  double epsilon = 0.05;
  double label_fraction = 0.1;

  PropagationConfig propagation{};
  double eta = 0.05;
  bool use_feature_optimization = true;

  int head_epochs = 200;
  double head_lr = 0.01;
  int surrogate_epochs = 100;
  double surrogate_lr = 0.01;
  int hidden = 16;
  Optimizer optimizer = Optimizer::adam;
  bool warm_start = false;

  TargetConfig target{};
  int runs = 10;
  bool reattack = false;
  bool run_dice = true;
  bool run_mean = true;

  std::uint64_t mask_seed = 1;
  std::uint64_t split_seed = 2;
  std::uint64_t attack_seed = 3;
  std::uint64_t target_seed = 4;

  /// Standard defaults; K and delta depend on the dataset.
  static RunConfig defaults_for(const std::string& dataset_name);

  void validate() const;
  nlohmann::json to_json() const;
};

bool is_known_dataset(const std::string& name);
std::string to_string(Optimizer optimizer);
Optimizer parse_optimizer(const std::string& name);

}  // namespace rida
