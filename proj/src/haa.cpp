#include "rida/haa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "textio.hpp"

namespace rida {

Labels attack_targets(const LabeledSplit& split, const Labels& pseudo_labels) {
  if (pseudo_labels.size() != split.labels.size()) throw ValidationError("pseudo-label count does not match vertex count");
  Labels targets = pseudo_labels;
  for (const auto v : split.train_idx) targets[v] = split.labels[v];
  return targets;
}

PerturbationState::PerturbationState(const Graph& clean, Index budget_total)
    : clean_(clean.dense_adjacency<std::int8_t>()),
      perturbation_(Int8Mat::Zero(clean.num_vertices(), clean.num_vertices())),
      degree_(clean.degrees()),
      budget_total_(budget_total) {
  if (budget_total < 0) throw ValidationError("negative perturbation budget");
}

bool PerturbationState::already_flipped(Index u, Index v) const {
  return flipped_.count(std::minmax(u, v)) != 0;
}

void PerturbationState::apply(const Flip& flip) {
  const auto [u, v] = std::minmax(flip.u, flip.v);
  if (u == v || u < 0 || v >= num_vertices()) throw ValidationError("flip on an invalid vertex pair");
  if (budget_used() >= budget_total_) throw BudgetExhaustedError("perturbation budget already spent");
  if (already_flipped(u, v)) throw ValidationError("pair flipped twice");
  const bool edge = current_edge(u, v);
  if (flip.action == FlipAction::add) {
    if (edge) throw ValidationError("ADD on an existing edge");
    perturbation_(u, v) = perturbation_(v, u) = 1;
    ++degree_[u];
    ++degree_[v];
  } else {
    if (!edge) throw ValidationError("DEL on a missing edge");
    if (degree_[u] < 2 || degree_[v] < 2) throw ValidationError("DEL would isolate a vertex");
    perturbation_(u, v) = perturbation_(v, u) = -1;
    --degree_[u];
    --degree_[v];
  }
  flipped_.insert({u, v});
  flips_.push_back({u, v, flip.action});
}

Graph PerturbationState::perturbed_graph() const { return Graph::from_dense(current_adjacency<int>()); }

Index perturbation_budget(Index num_edges, double epsilon) {
  // The slack keeps products such as 100 * 0.29 from flooring one short.
  return static_cast<Index>(std::floor(static_cast<double>(num_edges) * epsilon + 1e-9));
}

Flip select_perturbation(const MatrixXd& harm, const PerturbationState& state, ScoreRule rule) {
  if (state.budget_remaining() <= 0) throw BudgetExhaustedError("perturbation budget already spent");
  const Index n = state.num_vertices();
  if (harm.rows() != n || harm.cols() != n) throw ValidationError("gradient shape does not match the graph");

  MatrixXd score(n, n);
  for (Index u = 0; u < n; ++u) {
    for (Index v = 0; v < n; ++v) {
      const double a = state.current_edge(u, v) ? 1.0 : 0.0;
      score(u, v) = rule == ScoreRule::flip_direction ? harm(u, v) * (1.0 - 2.0 * a) : harm(u, v) * a;
    }
  }
  score.diagonal().setZero();
  score.array() -= score.minCoeff();

  double best = -std::numeric_limits<double>::infinity();
  Flip chosen{-1, -1, FlipAction::add};
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (!(score(u, v) > best)) continue;
      if (state.already_flipped(u, v)) continue;
      const bool edge = state.current_edge(u, v);
      if (edge && (state.current_degree(u) < 2 || state.current_degree(v) < 2)) continue;
      best = score(u, v);
      chosen = {u, v, edge ? FlipAction::remove : FlipAction::add};
    }
  }
  if (chosen.u < 0) throw BudgetExhaustedError("no admissible edge flip remains");
  return chosen;
}

MatrixXd attack_features(const Graph& graph, const AttributeMatrix& x_phi, const AttackConfig& cfg) {
  const MatrixXd normalized = row_normalize_attributes(x_phi).values;
  if (!cfg.use_feature_optimization || cfg.eta == 0.0) return normalized;
  const auto hat_a = normalize_adjacency<double>(graph, SelfLoops::without);
  const MatrixXd aphi = propagation_matrix(hat_a, cfg.delta, cfg.gamma, cfg.K);
  return optimize_features(aphi, normalized, cfg.eta);
}

AttackResult run_attack(const Graph& graph, const AttributeMatrix& x_phi, const LabeledSplit& split,
                        const Labels& pseudo_labels, double epsilon, const AttackConfig& cfg) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (x_phi.rows() != graph.num_vertices()) throw ValidationError("attribute rows do not match vertex count");

  AttackResult result{PerturbationState(graph, perturbation_budget(graph.num_edges(), epsilon)), graph, {}};
  auto& state = result.state;
  if (state.budget_total() == 0) return result;

  const MatrixXd xs = attack_features(graph, x_phi, cfg);
  const Labels targets = attack_targets(split, pseudo_labels);

  SurrogateParams<double> theta;
  for (Index iteration = 0; iteration < state.budget_total(); ++iteration) {
    const MatrixXd candidate = state.current_adjacency<double>();
    SurrogateTraining training = cfg.surrogate;
    training.seed = cfg.seed + static_cast<std::uint64_t>(iteration);
    const bool warm = cfg.warm_start && iteration > 0;
    theta = train_surrogate(candidate, xs, split, training, warm ? &theta : nullptr);

    const MatrixXd harm = -attack_gradient(theta, candidate, xs, targets);
    try {
      state.apply(select_perturbation(harm, state, cfg.score_rule));
    } catch (const BudgetExhaustedError& e) {
      result.warnings.push_back(std::string("attack stopped after ") + std::to_string(state.budget_used()) + " of " +
                                std::to_string(state.budget_total()) + " flips: " + e.what());
      break;
    }
  }
  result.perturbed = state.perturbed_graph();
  return result;
}

void write_diff(std::span<const Flip> flips, const std::filesystem::path& file) {
  auto out = detail::open_output(file);
  for (const auto& f : flips) {
    const auto [u, v] = std::minmax(f.u, f.v);
    out << (f.action == FlipAction::add ? "ADD" : "DEL") << ' ' << u << ' ' << v << '\n';
  }
  if (!out) throw IoError("write failed: " + file.string());
}

std::vector<Flip> read_diff(const std::filesystem::path& file) {
  auto in = detail::open_input(file);
  const std::string name = file.string();
  std::vector<Flip> flips;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line, ' ');
    if (fields.size() != 3 || (fields[0] != "ADD" && fields[0] != "DEL")) {
      throw ParseError(name, line_no, "expected 'ADD u v' or 'DEL u v'");
    }
    const auto u = detail::parse_number<Index>(fields[1], name, line_no);
    const auto v = detail::parse_number<Index>(fields[2], name, line_no);
    if (!(u < v)) throw ValidationError(name + ":" + std::to_string(line_no) + ": expected u < v");
    flips.push_back({u, v, fields[0] == "ADD" ? FlipAction::add : FlipAction::remove});
  }
  return flips;
}

Graph replay_diff(const Graph& clean, std::span<const Flip> flips) {
  PerturbationState state(clean, static_cast<Index>(flips.size()));
  for (const auto& f : flips) state.apply(f);
  return state.perturbed_graph();
}

}  // namespace rida
