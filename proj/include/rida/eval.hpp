#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rida/config.hpp"
#include "rida/dpgnn.hpp"
#include "rida/graph.hpp"
#include "rida/graphio.hpp"
#include "rida/haa.hpp"

namespace rida {

// --- Target GCN ---------------------------------------------------------------

/// Z = Ã ReLU(Ã X W1 + b1) W2 + b2.
struct GcnParams {
  MatrixXd w1;  // d x hidden
  RowVec<double> b1;
  MatrixXd w2;  // hidden x c
  RowVec<double> b2;
};

struct GcnGradient {
  double loss = 0;
  GcnParams grad;
};

/// Row-normalized attributes in sparse form; missing entries are zeros.
SparseXd target_features(const AttributeMatrix& x);

MatrixXd gcn_logits(const GcnParams& p, const SparseXd& norm_adj, const SparseXd& features);

GcnGradient gcn_loss_and_gradient(const GcnParams& p, const SparseXd& norm_adj, const SparseXd& features,
                                  std::span<const Index> rows, std::span<const int> row_labels);

GcnParams train_gcn_target(const Graph& g, const SparseXd& features, const LabeledSplit& split,
                           const TargetConfig& cfg);

Labels predict_gcn(const GcnParams& p, const Graph& g, const SparseXd& features);

/// Fraction of `test_idx` whose prediction matches its label.
double accuracy(const Labels& predictions, const Labels& labels, std::span<const Index> test_idx);

/// Trains the target on `g` and returns its test accuracy.
double evaluate_target(const Graph& g, const SparseXd& features, const LabeledSplit& split, const TargetConfig& cfg);

// --- Baselines ------------------------------------------------------------------

struct DiceResult {
  Graph perturbed;
  std::vector<Flip> flips;
  Index fallbacks = 0;
};

/// Disconnect-internally / connect-externally random attack using only the
/// labels of `split.train_idx`.
DiceResult dice_attack(const Graph& g, const LabeledSplit& split, double epsilon, std::uint64_t seed);

/// Fills each missing entry with its column's observed mean (0 when the
/// column has no observed entry); the result is fully observed.
AttributeMatrix mean_impute(const AttributeMatrix& x);

// --- Reporting ------------------------------------------------------------------

/// Mean after dropping one best and one worst value (plain mean below 3 values).
double trimmed_mean(std::span<const double> values);

/// log10(entry + 1e-12) as CSV, one row per matrix row.
void export_propagation_heatmap(const MatrixXd& aphi, const std::filesystem::path& file);
MatrixXd read_csv_matrix(const std::filesystem::path& file);

struct ArmResult {
  std::string name;
  std::vector<double> runs;
  double trimmed_mean = 0;
  Index flips = 0;
  Index budget = 0;
  std::vector<std::string> warnings;
};

struct ResultsReport {
  nlohmann::json config;
  ArmResult clean;
  std::vector<ArmResult> attacks;
  double surrogate_test_accuracy = 0;
  std::map<std::string, double> timings;
  std::vector<std::string> warnings;

  const ArmResult* attack(const std::string& name) const;
  nlohmann::json to_json() const;
};

// --- Pipeline -------------------------------------------------------------------

/// Largest component, attribute mask and label split for one configuration.
struct PreparedData {
  Dataset data;
  AttributeMatrix x_phi;
  LabeledSplit split;
};

PreparedData prepare_data(const RunConfig& cfg);
PreparedData prepare_data(const Dataset& raw, const RunConfig& cfg);

struct SurrogateOutcome {
  TransformParams<double> head;
  Labels pseudo_labels;
  double test_accuracy = 0;
};

/// Propagates, trains the head on the labeled split and labels every vertex.
SurrogateOutcome run_surrogate(const PreparedData& prepared, const RunConfig& cfg);

AttackConfig attack_config(const RunConfig& cfg);

/// Mean-imputation baseline: the same greedy gradient attack, fed imputed
/// attributes and self-training labels from a linear GCN surrogate.
AttackResult mean_imputation_attack(const PreparedData& prepared, const RunConfig& cfg);

/// Clean, RIDA, DICE and MEAN arms over `cfg.runs` paired target seeds.
ResultsReport run_experiment(const PreparedData& prepared, const RunConfig& cfg);
ResultsReport run_experiment(const RunConfig& cfg);

}  // namespace rida
