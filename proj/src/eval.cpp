#include "rida/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>

#include "rida/missingness.hpp"
#include "rida/random.hpp"
#include "textio.hpp"

namespace rida {

namespace {

SparseXd self_loop_normalized(const Graph& g) { return normalize_adjacency<double>(g, SelfLoops::with).entries; }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

SparseXd target_features(const AttributeMatrix& x) { return row_normalize_attributes(x).values.sparseView(); }

MatrixXd gcn_logits(const GcnParams& p, const SparseXd& norm_adj, const SparseXd& features) {
  const MatrixXd xw = features * p.w1;
  MatrixXd hidden = norm_adj * xw;
  hidden.rowwise() += p.b1;
  const MatrixXd rw = hidden.cwiseMax(0.0) * p.w2;
  MatrixXd logits = norm_adj * rw;
  logits.rowwise() += p.b2;
  return logits;
}

GcnGradient gcn_loss_and_gradient(const GcnParams& p, const SparseXd& norm_adj, const SparseXd& features,
                                  std::span<const Index> rows, std::span<const int> row_labels) {
  const MatrixXd xw = features * p.w1;
  MatrixXd hidden = norm_adj * xw;
  hidden.rowwise() += p.b1;
  const MatrixXd relu = hidden.cwiseMax(0.0);
  const MatrixXd rw = relu * p.w2;
  MatrixXd logits = norm_adj * rw;
  logits.rowwise() += p.b2;

  MatrixXd d_logits;
  GcnGradient out;
  out.loss = softmax_cross_entropy(logits, rows, row_labels, &d_logits);
  out.grad.b2 = d_logits.colwise().sum();
  const MatrixXd d_rw = norm_adj.transpose() * d_logits;
  out.grad.w2 = relu.transpose() * d_rw;
  MatrixXd d_hidden = d_rw * p.w2.transpose();
  d_hidden.array() *= (hidden.array() > 0.0).cast<double>();
  out.grad.b1 = d_hidden.colwise().sum();
  const MatrixXd d_xw = norm_adj.transpose() * d_hidden;
  out.grad.w1 = features.transpose() * d_xw;
  return out;
}

GcnParams train_gcn_target(const Graph& g, const SparseXd& features, const LabeledSplit& split,
                           const TargetConfig& cfg) {
  const SparseXd norm = self_loop_normalized(g);
  Rng rng(cfg.seed);
  GcnParams p;
  p.w1 = glorot_uniform<double>(features.cols(), cfg.hidden, rng);
  p.b1 = RowVec<double>::Zero(cfg.hidden);
  p.w2 = glorot_uniform<double>(cfg.hidden, split.num_classes, rng);
  p.b2 = RowVec<double>::Zero(split.num_classes);
  const auto targets = gather(split.labels, split.train_idx);

  ParameterUpdater<double> updater({cfg.optimizer, cfg.learning_rate});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto g_out = gcn_loss_and_gradient(p, norm, features, split.train_idx, targets);
    if (!std::isfinite(g_out.loss)) throw DivergenceError("target GCN", epoch);
    updater.next_epoch();
    updater.step(0, p.w1, g_out.grad.w1);
    updater.step(1, p.b1, g_out.grad.b1);
    updater.step(2, p.w2, g_out.grad.w2);
    updater.step(3, p.b2, g_out.grad.b2);
  }
  return p;
}

Labels predict_gcn(const GcnParams& p, const Graph& g, const SparseXd& features) {
  return argmax_rows(gcn_logits(p, self_loop_normalized(g), features));
}

double accuracy(const Labels& predictions, const Labels& labels, std::span<const Index> test_idx) {
  if (test_idx.empty()) throw UndefinedMetricError("accuracy over an empty test set");
  std::size_t correct = 0;
  for (const auto v : test_idx) correct += predictions[v] == labels[v] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test_idx.size());
}

double evaluate_target(const Graph& g, const SparseXd& features, const LabeledSplit& split, const TargetConfig& cfg) {
  const auto params = train_gcn_target(g, features, split, cfg);
  return accuracy(predict_gcn(params, g, features), split.labels, split.test_idx);
}

DiceResult dice_attack(const Graph& g, const LabeledSplit& split, double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  const Index n = g.num_vertices();
  PerturbationState state(g, perturbation_budget(g.num_edges(), epsilon));
  std::vector<int> known(static_cast<std::size_t>(n), -1);
  for (const auto v : split.train_idx) known[v] = split.labels[v];
  std::vector<Edge> current = g.edges();
  Rng rng(seed);
  DiceResult result;

  auto removable = [&](Index u, Index v) {
    return !state.already_flipped(u, v) && state.current_degree(u) >= 2 && state.current_degree(v) >= 2;
  };
  auto pick_delete = [&]() -> std::optional<Flip> {
    std::vector<Edge> options;
    for (const auto& e : current) {
      const bool same_or_unknown = known[e.u] < 0 || known[e.v] < 0 || known[e.u] == known[e.v];
      if (same_or_unknown && removable(e.u, e.v)) options.push_back(e);
    }
    if (options.empty()) return std::nullopt;
    const auto& e = options[rng.uniform_index(options.size())];
    return Flip{e.u, e.v, FlipAction::remove};
  };
  auto pick_add = [&]() -> std::optional<Flip> {
    std::vector<Edge> options;
    for (std::size_t i = 0; i < split.train_idx.size(); ++i) {
      for (std::size_t j = i + 1; j < split.train_idx.size(); ++j) {
        const auto e = make_edge(split.train_idx[i], split.train_idx[j]);
        if (known[e.u] != known[e.v] && !state.current_edge(e.u, e.v) && !state.already_flipped(e.u, e.v)) {
          options.push_back(e);
        }
      }
    }
    if (options.empty()) return std::nullopt;
    const auto& e = options[rng.uniform_index(options.size())];
    return Flip{e.u, e.v, FlipAction::add};
  };
  auto pick_any = [&]() -> std::optional<Flip> {
    if (n < 2) return std::nullopt;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const auto u = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      const auto v = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      if (u == v || state.already_flipped(u, v)) continue;
      const auto e = make_edge(u, v);
      if (!state.current_edge(u, v)) return Flip{e.u, e.v, FlipAction::add};
      if (removable(u, v)) return Flip{e.u, e.v, FlipAction::remove};
    }
    return std::nullopt;
  };

  while (state.budget_remaining() > 0) {
    auto flip = rng.uniform01() < 0.5 ? pick_delete() : pick_add();
    if (!flip) {
      flip = pick_any();
      ++result.fallbacks;
      if (!flip) break;
    }
    state.apply(*flip);
    const auto e = make_edge(flip->u, flip->v);
    if (flip->action == FlipAction::add) {
      current.push_back(e);
    } else {
      current.erase(std::find(current.begin(), current.end(), e));
    }
  }
  result.flips = state.flips();
  result.perturbed = state.perturbed_graph();
  return result;
}

AttributeMatrix mean_impute(const AttributeMatrix& x) {
  AttributeMatrix out = x;
  for (Index j = 0; j < x.cols(); ++j) {
    double total = 0.0;
    Index observed = 0;
    for (Index i = 0; i < x.rows(); ++i) {
      if (x.mask(i, j)) {
        total += x.values(i, j);
        ++observed;
      }
    }
    const double fill = observed > 0 ? total / static_cast<double>(observed) : 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      if (!x.mask(i, j)) out.values(i, j) = fill;
    }
  }
  out.mask.setConstant(true);
  return out;
}

double trimmed_mean(std::span<const double> values) {
  if (values.empty()) throw UndefinedMetricError("trimmed mean of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto first = sorted.begin();
  auto last = sorted.end();
  if (sorted.size() >= 3) {
    ++first;
    --last;
  }
  return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

void export_propagation_heatmap(const MatrixXd& aphi, const std::filesystem::path& file) {
  if ((aphi.array() < 0.0).any()) throw ValidationError("propagation matrix has negative entries");
  auto out = detail::open_output(file);
  for (Index i = 0; i < aphi.rows(); ++i) {
    for (Index j = 0; j < aphi.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(std::log10(aphi(i, j) + 1e-12));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + file.string());
}

MatrixXd read_csv_matrix(const std::filesystem::path& file) {
  auto in = detail::open_input(file);
  const std::string name = file.string();
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto field : detail::split_fields(line, ',')) row.push_back(detail::parse_number<double>(field, name, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(name, line_no, "ragged CSV row");
    rows.push_back(std::move(row));
  }
  MatrixXd m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// --- Pipeline -------------------------------------------------------------------

PreparedData prepare_data(const Dataset& raw, const RunConfig& cfg) {
  PreparedData out;
  out.data = largest_connected_component(raw);
  if (!cfg.mask_file.empty()) {
    out.x_phi = load_mask(out.data.attributes, cfg.mask_file);
  } else {
    out.x_phi = apply_missingness(out.data.attributes, {cfg.alpha, cfg.beta, cfg.mask_seed});
  }
  out.split = split_labels(out.data.labels, cfg.label_fraction, cfg.split_seed);
  return out;
}

PreparedData prepare_data(const RunConfig& cfg) { return prepare_data(load_dataset(cfg.dataset_dir), cfg); }

SurrogateOutcome run_surrogate(const PreparedData& prepared, const RunConfig& cfg) {
  const auto normalized = row_normalize_attributes(prepared.x_phi);
  const MatrixXd initial = initialize_features<double>(normalized, cfg.propagation.omega);
  const auto hat_a = normalize_adjacency<double>(prepared.data.graph, SelfLoops::without);
  const auto trace = propagate(initial, hat_a, cfg.propagation, prepared.x_phi.mask, false);

  TransformTraining training;
  training.epochs = cfg.head_epochs;
  training.hidden = cfg.hidden;
  training.optimizer = {cfg.optimizer, cfg.head_lr};
  training.seed = cfg.attack_seed;

  SurrogateOutcome out;
  out.head = train_transform(trace.final(), prepared.split, training);
  out.pseudo_labels = predict(out.head, trace.final()).labels;
  out.test_accuracy = accuracy(out.pseudo_labels, prepared.data.labels, prepared.split.test_idx);
  return out;
}

AttackConfig attack_config(const RunConfig& cfg) {
  AttackConfig a;
  a.K = cfg.propagation.K;
  a.delta = cfg.propagation.delta;
  a.gamma = cfg.propagation.gamma;
  a.eta = cfg.eta;
  a.use_feature_optimization = cfg.use_feature_optimization;
  a.surrogate.epochs = cfg.surrogate_epochs;
  a.surrogate.hidden = cfg.hidden;
  a.surrogate.optimizer = {cfg.optimizer, cfg.surrogate_lr};
  a.warm_start = cfg.warm_start;
  a.seed = cfg.attack_seed;
  return a;
}

AttackResult mean_imputation_attack(const PreparedData& prepared, const RunConfig& cfg) {
  const AttributeMatrix imputed = mean_impute(prepared.x_phi);
  const MatrixXd xs = row_normalize_attributes(imputed).values;
  AttackConfig a = attack_config(cfg);
  a.use_feature_optimization = false;

  SurrogateTraining training = a.surrogate;
  training.seed = cfg.attack_seed;
  const MatrixXd clean = prepared.data.graph.dense_adjacency<double>();
  const auto theta = train_surrogate(clean, xs, prepared.split, training);
  const Labels pseudo = argmax_rows(surrogate_logits(theta, clean, xs));
  return run_attack(prepared.data.graph, imputed, prepared.split, pseudo, cfg.epsilon, a);
}

const ArmResult* ResultsReport::attack(const std::string& name) const {
  for (const auto& a : attacks) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

namespace {

nlohmann::json arm_json(const ArmResult& arm) {
  nlohmann::json j = {{"runs", arm.runs}, {"trimmed_mean", arm.trimmed_mean}};
  if (arm.name != "clean") {
    j["flips"] = arm.flips;
    j["budget"] = arm.budget;
    j["warnings"] = arm.warnings;
  }
  return j;
}

}  // namespace

nlohmann::json ResultsReport::to_json() const {
  nlohmann::json attacks_json = nlohmann::json::object();
  for (const auto& a : attacks) attacks_json[a.name] = arm_json(a);
  return {
      {"config", config},
      {"clean", arm_json(clean)},
      {"attacks", attacks_json},
      {"surrogate", {{"test_accuracy", surrogate_test_accuracy}}},
      {"timings", timings},
      {"warnings", warnings},
  };
}

ResultsReport run_experiment(const PreparedData& prepared, const RunConfig& cfg) {
  cfg.validate();
  ResultsReport report;
  report.config = cfg.to_json();
  report.warnings = prepared.split.warnings;
  const Graph& graph = prepared.data.graph;
  const SparseXd features = target_features(prepared.x_phi);
  const Index budget = perturbation_budget(graph.num_edges(), cfg.epsilon);

  auto target_for_run = [&](int run) {
    TargetConfig t = cfg.target;
    t.seed = cfg.target_seed + static_cast<std::uint64_t>(run);
    return t;
  };

  Stopwatch surrogate_clock;
  const auto surrogate = run_surrogate(prepared, cfg);
  report.surrogate_test_accuracy = surrogate.test_accuracy;
  report.timings["surrogate"] = surrogate_clock.seconds();

  report.clean.name = "clean";
  Stopwatch eval_clock;
  for (int r = 0; r < cfg.runs; ++r) report.clean.runs.push_back(evaluate_target(graph, features, prepared.split, target_for_run(r)));
  double eval_seconds = eval_clock.seconds();

  ArmResult rida{"rida", {}, 0, 0, budget, {}};
  ArmResult dice{"dice", {}, 0, 0, budget, {}};
  ArmResult mean{"mean", {}, 0, 0, budget, {}};
  double rida_seconds = 0, dice_seconds = 0, mean_seconds = 0;
  std::optional<Graph> rida_graph, dice_graph, mean_graph;

  for (int r = 0; r < cfg.runs; ++r) {
    RunConfig run_cfg = cfg;
    if (cfg.reattack) run_cfg.attack_seed = derive_seed(cfg.attack_seed, static_cast<std::uint64_t>(r));
    if (r == 0 || cfg.reattack) {
      Stopwatch clock;
      auto attacked = run_attack(graph, prepared.x_phi, prepared.split, surrogate.pseudo_labels, cfg.epsilon,
                                 attack_config(run_cfg));
      rida_seconds += clock.seconds();
      rida.flips = attacked.state.budget_used();
      rida.warnings.insert(rida.warnings.end(), attacked.warnings.begin(), attacked.warnings.end());
      rida_graph = std::move(attacked.perturbed);
      if (cfg.run_dice) {
        Stopwatch dice_clock;
        auto d = dice_attack(graph, prepared.split, cfg.epsilon, run_cfg.attack_seed);
        dice_seconds += dice_clock.seconds();
        dice.flips = static_cast<Index>(d.flips.size());
        if (d.fallbacks > 0) dice.warnings.push_back(std::to_string(d.fallbacks) + " unconstrained fallback flips");
        dice_graph = std::move(d.perturbed);
      }
      if (cfg.run_mean) {
        Stopwatch mean_clock;
        auto m = mean_imputation_attack(prepared, run_cfg);
        mean_seconds += mean_clock.seconds();
        mean.flips = m.state.budget_used();
        mean.warnings.insert(mean.warnings.end(), m.warnings.begin(), m.warnings.end());
        mean_graph = std::move(m.perturbed);
      }
    }
    Stopwatch clock;
    const auto t = target_for_run(r);
    rida.runs.push_back(evaluate_target(*rida_graph, features, prepared.split, t));
    if (dice_graph) dice.runs.push_back(evaluate_target(*dice_graph, features, prepared.split, t));
    if (mean_graph) mean.runs.push_back(evaluate_target(*mean_graph, features, prepared.split, t));
    eval_seconds += clock.seconds();
  }

  report.clean.trimmed_mean = trimmed_mean(report.clean.runs);
  rida.trimmed_mean = trimmed_mean(rida.runs);
  report.attacks.push_back(rida);
  if (cfg.run_dice) {
    dice.trimmed_mean = trimmed_mean(dice.runs);
    report.attacks.push_back(dice);
  }
  if (cfg.run_mean) {
    mean.trimmed_mean = trimmed_mean(mean.runs);
    report.attacks.push_back(mean);
  }
  report.timings["rida_attack"] = rida_seconds;
  if (cfg.run_dice) report.timings["dice_attack"] = dice_seconds;
  if (cfg.run_mean) report.timings["mean_attack"] = mean_seconds;
  report.timings["target_training"] = eval_seconds;
  return report;
}

ResultsReport run_experiment(const RunConfig& cfg) { return run_experiment(prepare_data(cfg), cfg); }

}  // namespace rida
