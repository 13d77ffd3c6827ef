#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "rida/haa.hpp"
#include "support.hpp"

namespace rida {
namespace {

using testing::TempDir;

MatrixXd random_matrix(Index rows, Index cols, Rng& rng, double lo = -1, double hi = 1) {
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

LabeledSplit all_labeled(const Labels& y, int classes) {
  LabeledSplit s;
  s.labels = y;
  s.num_classes = classes;
  for (std::size_t i = 0; i < y.size(); ++i) s.train_idx.push_back(static_cast<Index>(i));
  return s;
}

TEST(TransitionPowers, TwoVertexAndBase) {
  const std::vector<Edge> e{{0, 1}};
  const auto hat = normalize_adjacency<double>(Graph(2, e), SelfLoops::without);
  const auto t = build_transition_powers(hat, 2);
  EXPECT_TRUE(t[0].isApprox(MatrixXd(hat.entries)));
  EXPECT_TRUE(t[1].isApprox(MatrixXd::Identity(2, 2)));
}

TEST(TransitionPowers, MatchDenseOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.uniform_index(49));
    const Graph g = testing::random_connected_graph(n, 0.1, rng);
    const int K = 1 + static_cast<int>(rng.uniform_index(20));
    const auto got = build_transition_powers(normalize_adjacency<double>(g, SelfLoops::without), K);
    const auto want = testing::power_oracle(g, K);
    ASSERT_EQ(got.size(), want.size());
    for (int k = 0; k < K; ++k) EXPECT_LE(testing::max_abs_diff(got[k], want[k]), 1e-12);
  }
}

TEST(PropagationMatrix, BaseCasesAndOracle) {
  const std::vector<Edge> path{{0, 1}, {1, 2}, {2, 3}};
  const Graph g(4, path);
  const auto hat = normalize_adjacency<double>(g, SelfLoops::without);
  const auto powers = build_transition_powers(hat, 3);
  EXPECT_TRUE(build_propagation_matrix(powers, 0.1, 0.0, 1).isIdentity());
  EXPECT_TRUE(build_propagation_matrix(powers, 0.0, 0.0, 3).isIdentity());
  EXPECT_LE(testing::max_abs_diff(build_propagation_matrix(powers, 0.1, 0.0, 3), testing::aphi_oracle(g, 0.1, 0.0, 3)),
            1e-12);

  Rng rng(19);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.uniform_index(49));
    const Graph r = testing::random_connected_graph(n, 0.1, rng);
    const int K = 1 + static_cast<int>(rng.uniform_index(20));
    const double delta = rng.uniform(0.01, 1.0), gamma = rng.uniform(0.0, 0.5);
    const auto h = normalize_adjacency<double>(r, SelfLoops::without);
    const auto want = testing::aphi_oracle(r, delta, gamma, K);
    EXPECT_LE(testing::max_abs_diff(build_propagation_matrix(build_transition_powers(h, K), delta, gamma, K), want), 1e-12);
    EXPECT_LE(testing::max_abs_diff(propagation_matrix(h, delta, gamma, K), want), 1e-12);
  }
}

TEST(OptimizeFeatures, Blends) {
  MatrixXd xn(2, 2);
  xn << 1, 0, 0, 1;
  EXPECT_TRUE((optimize_features(MatrixXd(MatrixXd::Ones(2, 2)), xn, 0.0).array() == xn.array()).all());
  EXPECT_TRUE(optimize_features(MatrixXd(MatrixXd::Identity(2, 2)), xn, 1.0).isApprox(xn));
  MatrixXd aphi(2, 2);
  aphi << 0.9, 0.1, 0.1, 0.9;
  MatrixXd want(2, 2);
  want << 0.05 * 0.9 + 0.95, 0.05 * 0.1, 0.05 * 0.1, 0.05 * 0.9 + 0.95;
  EXPECT_LE((optimize_features(aphi, xn, 0.05) - want).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(optimize_features(aphi, xn, 1.5), ValidationError);
}

TEST(Surrogate, SeparableToyAndDeterminism) {
  Rng rng(23);
  const Index n = 30;
  std::vector<Edge> edges;
  for (Index v = 0; v + 2 < n; ++v) edges.push_back({v, v + 2});
  const Graph g(n, edges);
  Labels y(n);
  MatrixXd x(n, 3);
  for (Index v = 0; v < n; ++v) {
    y[v] = static_cast<int>(v % 2);
    x.row(v) << (y[v] ? 1.0 : 0.0), (y[v] ? 0.0 : 1.0), rng.uniform(0, 0.1);
  }
  const auto split = all_labeled(y, 2);
  SurrogateTraining cfg;
  cfg.seed = 4;
  cfg.epochs = 200;
  const MatrixXd a = g.dense_adjacency();
  const auto theta = train_surrogate(a, x, split, cfg);
  EXPECT_EQ(argmax_rows(surrogate_logits(theta, a, x)), y);
  const auto again = train_surrogate(a, x, split, cfg);
  EXPECT_TRUE((theta.w2.array() == again.w2.array()).all());
  EXPECT_TRUE((theta.w1.array() == again.w1.array()).all());
}

TEST(AttackGradient, ZeroFeaturesAndSymmetry) {
  Rng rng(8);
  const Graph g = testing::random_connected_graph(10, 0.2, rng);
  const MatrixXd a = g.dense_adjacency();
  const SurrogateParams<double> theta{random_matrix(4, 3, rng), random_matrix(3, 2, rng)};
  Labels y(10);
  for (Index v = 0; v < 10; ++v) y[v] = static_cast<int>(rng.uniform_index(2));
  EXPECT_TRUE(attack_gradient(theta, a, MatrixXd(MatrixXd::Zero(10, 4)), y).isZero());
  const MatrixXd grad = attack_gradient(theta, a, random_matrix(10, 4, rng), y);
  EXPECT_EQ((grad - grad.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AttackGradient, MatchesFiniteDifferences) {
  Rng rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = testing::random_connected_graph(12, 0.25, rng);
    const SurrogateParams<double> theta{random_matrix(5, 4, rng), random_matrix(4, 3, rng)};
    const MatrixXd xs = random_matrix(12, 5, rng, 0, 1);
    Labels y(12);
    for (auto& label : y) label = static_cast<int>(rng.uniform_index(3));
    const MatrixXd a = g.dense_adjacency();
    const MatrixXd analytic = attack_gradient(theta, a, xs, y);
    const MatrixXd numeric = testing::attack_gradient_fd(theta, a, xs, y, 1e-5);
    EXPECT_LE(testing::max_relative_error(analytic, numeric, 1e-7), 1e-4);
  }
}

TEST(AttackTargets, KeepTrueLabels) {
  LabeledSplit s;
  s.labels = {0, 1, 2, 0};
  s.train_idx = {1, 3};
  EXPECT_EQ(attack_targets(s, Labels{2, 2, 2, 2}), (Labels{2, 1, 2, 0}));
  EXPECT_THROW(attack_targets(s, Labels{0}), ValidationError);
}

TEST(PerturbationState, RejectsInvalidFlips) {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}};
  PerturbationState s(Graph(4, e), 3);
  EXPECT_THROW(s.apply({0, 1, FlipAction::remove}), ValidationError);  // vertex 0 has degree 1
  EXPECT_THROW(s.apply({0, 1, FlipAction::add}), ValidationError);
  EXPECT_THROW(s.apply({0, 2, FlipAction::remove}), ValidationError);
  EXPECT_THROW(s.apply({1, 1, FlipAction::add}), ValidationError);
  s.apply({0, 2, FlipAction::add});
  EXPECT_THROW(s.apply({2, 0, FlipAction::remove}), ValidationError);  // already flipped
  s.apply({1, 2, FlipAction::remove});
  s.apply({0, 3, FlipAction::add});
  EXPECT_THROW(s.apply({1, 3, FlipAction::add}), BudgetExhaustedError);
  EXPECT_EQ(s.budget_remaining(), 0);
}

TEST(Budget, Floor) {
  EXPECT_EQ(perturbation_budget(5069, 0.05), 253);
  EXPECT_EQ(perturbation_budget(100, 0.29), 29);
  EXPECT_EQ(perturbation_budget(19, 0.05), 0);
}

TEST(Select, UniqueArgmaxAdds) {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}};
  const PerturbationState s(Graph(4, e), 1);
  MatrixXd harm = MatrixXd::Zero(4, 4);
  harm(0, 3) = harm(3, 0) = 5;
  EXPECT_EQ(select_perturbation(harm, s), (Flip{0, 3, FlipAction::add}));
}

TEST(Select, SkipsDegreeOneDeletion) {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {1, 3}};
  const PerturbationState s(Graph(4, e), 1);
  MatrixXd harm = MatrixXd::Zero(4, 4);
  harm(0, 1) = harm(1, 0) = -10;  // deleting (0,1) would isolate vertex 0
  harm(1, 2) = harm(2, 1) = -4;
  EXPECT_EQ(select_perturbation(harm, s), (Flip{1, 2, FlipAction::remove}));
}

TEST(Select, ElementwiseStepOnlyDeletes) {
  Rng rng(1);
  const Graph g = testing::random_connected_graph(8, 0.4, rng);
  const PerturbationState s(g, 1);
  const MatrixXd harm = random_matrix(8, 8, rng);
  EXPECT_EQ(select_perturbation(harm + harm.transpose(), s, ScoreRule::elementwise_step).action, FlipAction::remove);
}

TEST(Select, MatchesBruteForce) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = testing::random_connected_graph(5, 0.4, rng);
    PerturbationState s(g, 3);
    MatrixXd harm = random_matrix(5, 5, rng);
    harm = (harm + harm.transpose()).eval();
    // Some ties so that the ordering rule matters.
    harm = (harm * 2).array().round() / 2;
    if (rng.uniform01() < 0.5) s.apply(select_perturbation(harm, s));

    double best = -1e300;
    Flip want{-1, -1, FlipAction::add};
    for (Index u = 0; u < 5; ++u) {
      for (Index v = u + 1; v < 5; ++v) {
        if (s.already_flipped(u, v)) continue;
        const bool edge = s.current_edge(u, v);
        if (edge && (s.current_degree(u) < 2 || s.current_degree(v) < 2)) continue;
        const double score = edge ? -harm(u, v) : harm(u, v);
        if (score > best) {
          best = score;
          want = {u, v, edge ? FlipAction::remove : FlipAction::add};
        }
      }
    }
    EXPECT_EQ(select_perturbation(harm, s), want);
  }
}

TEST(RunAttack, ZeroBudgetReturnsInput) {
  Rng rng(2);
  const Graph g = testing::random_connected_graph(10, 0.1, rng);
  const AttributeMatrix x(random_matrix(10, 4, rng, 0, 1));
  const auto split = split_labels(Labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, 0.5, 1);
  const auto result = run_attack(g, x, split, split.labels, 0.01, AttackConfig{});
  EXPECT_EQ(result.perturbed, g);
  EXPECT_EQ(result.state.budget_used(), 0);
  EXPECT_THROW(run_attack(g, x, split, split.labels, 0.0, AttackConfig{}), ValidationError);
}

TEST(RunAttack, DeterministicAndReplayable) {
  auto data = testing::csbm(40, 12, 2, 0.25, 0.03, 0.5, 0.1, 5);
  data = largest_connected_component(data);
  const auto split = split_labels(data.labels, 0.3, 3);
  AttackConfig cfg;
  cfg.K = 4;
  cfg.surrogate.epochs = 30;
  cfg.seed = 12;
  const auto a = run_attack(data.graph, data.attributes, split, data.labels, 0.1, cfg);
  const auto b = run_attack(data.graph, data.attributes, split, data.labels, 0.1, cfg);
  EXPECT_EQ(a.state.flips(), b.state.flips());
  EXPECT_EQ(a.state.budget_used(), perturbation_budget(data.graph.num_edges(), 0.1));

  TempDir dir("diff");
  write_diff(a.state.flips(), dir / "diff.txt");
  const auto flips = read_diff(dir / "diff.txt");
  EXPECT_EQ(flips, a.state.flips());
  EXPECT_EQ(replay_diff(data.graph, flips), a.perturbed);

  cfg.warm_start = true;
  const auto warm = run_attack(data.graph, data.attributes, split, data.labels, 0.1, cfg);
  EXPECT_EQ(warm.state.budget_used(), a.state.budget_used());
}

TEST(DiffFile, RejectsMalformedLines) {
  TempDir dir("baddiff");
  std::ofstream(dir / "a.txt") << "ADD 1 0\n";
  EXPECT_THROW(read_diff(dir / "a.txt"), ValidationError);
  std::ofstream(dir / "b.txt") << "ADD 0 1\nFLIP 1 2\n";
  EXPECT_THROW(read_diff(dir / "b.txt"), ParseError);
}

}  // namespace
}  // namespace rida
