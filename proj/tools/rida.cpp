// Command-line front end: mask, attack, eval, reproduce, heatmap.
//
// Exit codes: 0 success, 1 I/O, 2 validation, 3 numerical divergence.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rida/config.hpp"
#include "rida/eval.hpp"
#include "rida/haa.hpp"
#include "rida/missingness.hpp"

namespace fs = std::filesystem;
using namespace rida;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct Flags {
  RunConfig cfg = RunConfig::defaults_for("cora");
  std::string optimizer = "adam";
  std::string target_optimizer = "adam";
  bool no_global = false;
  bool no_local = false;
  bool no_bfp = false;
  bool no_feature_optimization = false;
  bool allow_empty = false;
  std::string data_root = "data";
  fs::path out_file;
  fs::path attacked_edges;
  fs::path diff_file;
  fs::path head_file;
  std::string attack_name = "rida";
};

void add_dataset_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--data", f.cfg.dataset_dir, "Dataset directory (edges.tsv, attrs.tsv, labels.tsv)");
}

void add_mask_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alpha", f.cfg.alpha, "Fraction of attributes missing per affected vertex");
  cmd->add_option("--beta", f.cfg.beta, "Fraction of vertices with missing attributes");
  cmd->add_option("--mask-seed", f.cfg.mask_seed, "Seed for the missingness mask");
}

void add_split_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mask", f.cfg.mask_file, "Existing mask.tsv (otherwise generated from --alpha/--beta)");
  cmd->add_option("--split-seed", f.cfg.split_seed, "Seed for the labeled/unlabeled split");
  cmd->add_option("--label-fraction", f.cfg.label_fraction, "Labeled fraction of vertices");
}

void add_propagation_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--K", f.cfg.propagation.K, "Propagation layers");
  cmd->add_option("--delta", f.cfg.propagation.delta, "Decay scale");
  cmd->add_option("--gamma", f.cfg.propagation.gamma, "Per-layer decay rate");
  cmd->add_option("--omega", f.cfg.propagation.omega, "Observed-attribute weight");
  cmd->add_flag("--no-global", f.no_global, "Disable the global attention factor");
  cmd->add_flag("--no-local", f.no_local, "Disable the local attention factor");
  cmd->add_flag("--no-bfp", f.no_bfp, "Disable the bifocal feature processor");
}

void add_attack_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--epsilon", f.cfg.epsilon, "Perturbed fraction of edges");
  cmd->add_option("--eta", f.cfg.eta, "Positional-encoding trade-off");
  cmd->add_flag("--no-feature-optimization", f.no_feature_optimization, "Attack on normalized attributes only");
  cmd->add_option("--surrogate-epochs", f.cfg.surrogate_epochs, "Surrogate epochs per flip");
  cmd->add_option("--surrogate-lr", f.cfg.surrogate_lr, "Surrogate learning rate");
  cmd->add_option("--head-epochs", f.cfg.head_epochs, "Depth-plus head epochs");
  cmd->add_option("--head-lr", f.cfg.head_lr, "Depth-plus head learning rate");
  cmd->add_option("--hidden", f.cfg.hidden, "Hidden width of attacker models");
  cmd->add_option("--optimizer", f.optimizer, "adam or gd")->check(CLI::IsMember({"adam", "gd"}));
  cmd->add_flag("--warm-start", f.cfg.warm_start, "Reuse the previous surrogate parameters each flip");
  cmd->add_option("--attack-seed", f.cfg.attack_seed, "Seed for attacker models");
}

void add_target_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--runs", f.cfg.runs, "Target trainings per graph");
  cmd->add_option("--target-seed", f.cfg.target_seed, "Base seed for target trainings");
  cmd->add_option("--target-lr", f.cfg.target.learning_rate, "Target learning rate");
  cmd->add_option("--target-epochs", f.cfg.target.epochs, "Target epochs");
  cmd->add_option("--target-hidden", f.cfg.target.hidden, "Target hidden width");
  cmd->add_option("--target-optimizer", f.target_optimizer, "adam or gd")->check(CLI::IsMember({"adam", "gd"}));
}

void finalize(Flags& f) {
  f.cfg.propagation.use_global_attention = !f.no_global;
  f.cfg.propagation.use_local_attention = !f.no_local;
  f.cfg.propagation.use_bfp = !f.no_bfp;
  f.cfg.use_feature_optimization = !f.no_feature_optimization;
  f.cfg.optimizer = parse_optimizer(f.optimizer);
  f.cfg.target.optimizer = parse_optimizer(f.target_optimizer);
}

void require_data(const Flags& f) {
  if (f.cfg.dataset_dir.empty()) throw ValidationError("--data is required");
}

void write_json(const nlohmann::json& j, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

/// "key = value" lines become "--key value" tokens placed ahead of the real
/// flags so that the command line wins. Boolean keys expand to the bare flag
/// when true.
std::vector<std::string> config_tokens(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw NotFoundError("config file not found: " + file.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(file.string(), line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value == "true") {
      tokens.push_back("--" + key);
    } else if (value != "false") {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    }
  }
  return tokens;
}

/// The flags needed to re-run this invocation.
std::string config_echo(const RunConfig& c) {
  std::ostringstream out;
  out << "data = " << c.dataset_dir.string() << '\n';
  if (!c.mask_file.empty()) out << "mask = " << c.mask_file.string() << '\n';
  out << "alpha = " << c.alpha << "\nbeta = " << c.beta << "\nepsilon = " << c.epsilon
      << "\nlabel-fraction = " << c.label_fraction << "\nK = " << c.propagation.K << "\ndelta = " << c.propagation.delta
      << "\ngamma = " << c.propagation.gamma << "\nomega = " << c.propagation.omega
      << "\nno-global = " << std::boolalpha << !c.propagation.use_global_attention
      << "\nno-local = " << !c.propagation.use_local_attention << "\nno-bfp = " << !c.propagation.use_bfp
      << "\neta = " << c.eta << "\nno-feature-optimization = " << !c.use_feature_optimization
      << "\nsurrogate-epochs = " << c.surrogate_epochs << "\nsurrogate-lr = " << c.surrogate_lr
      << "\nhead-epochs = " << c.head_epochs << "\nhead-lr = " << c.head_lr << "\nhidden = " << c.hidden
      << "\noptimizer = " << to_string(c.optimizer) << "\nwarm-start = " << c.warm_start
      << "\nmask-seed = " << c.mask_seed << "\nsplit-seed = " << c.split_seed << "\nattack-seed = " << c.attack_seed
      << "\ntarget-seed = " << c.target_seed << "\nruns = " << c.runs << "\ntarget-lr = " << c.target.learning_rate
      << "\ntarget-epochs = " << c.target.epochs << "\ntarget-hidden = " << c.target.hidden
      << "\ntarget-optimizer = " << to_string(c.target.optimizer) << '\n';
  return out.str();
}

void write_text(const std::string& text, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
}

int cmd_mask(Flags& f) {
  require_data(f);
  const MissingnessSpec spec{f.cfg.alpha, f.cfg.beta, f.cfg.mask_seed};
  spec.validate();
  if (f.out_file.empty()) throw ValidationError("--out is required");
  const auto data = largest_connected_component(load_dataset(f.cfg.dataset_dir));
  const auto masked = apply_missingness(data.attributes, spec);
  save_mask(masked, f.out_file, f.allow_empty);
  std::cerr << "wrote " << masked.missing_count() << " missing entries to " << f.out_file.string() << '\n';
  return 0;
}

int cmd_attack(Flags& f) {
  require_data(f);
  f.cfg.validate();
  const auto prepared = prepare_data(f.cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto surrogate = run_surrogate(prepared, f.cfg);
  std::cerr << "surrogate test accuracy " << surrogate.test_accuracy << '\n';
  if (!f.head_file.empty()) save_transform(surrogate.head, f.head_file.string());
  const auto result = run_attack(prepared.data.graph, prepared.x_phi, prepared.split, surrogate.pseudo_labels,
                                 f.cfg.epsilon, attack_config(f.cfg));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir = f.cfg.output_dir;
  fs::create_directories(dir);
  write_diff(result.state.flips(), dir / "diff.txt");
  write_edges(result.perturbed, dir / "edges.tsv");
  write_text(config_echo(f.cfg), dir / "config.echo");
  write_json({{"config", f.cfg.to_json()},
              {"budget", result.state.budget_total()},
              {"flips", result.state.budget_used()},
              {"surrogate_test_accuracy", surrogate.test_accuracy},
              {"seconds", seconds},
              {"warning", result.warnings.empty() ? nlohmann::json(nullptr) : nlohmann::json(result.warnings)}},
             dir / "attack.json");
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "applied " << result.state.budget_used() << " flips in " << seconds << " s\n";
  return 0;
}

int cmd_eval(Flags& f) {
  require_data(f);
  f.cfg.validate();
  if (f.attacked_edges.empty() && f.diff_file.empty()) throw ValidationError("--attacked or --diff is required");
  const auto prepared = prepare_data(f.cfg);
  const Graph& clean = prepared.data.graph;
  const Graph attacked = f.diff_file.empty() ? read_edges(f.attacked_edges, clean.num_vertices())
                                             : replay_diff(clean, read_diff(f.diff_file));
  const auto features = target_features(prepared.x_phi);

  ResultsReport report;
  report.config = f.cfg.to_json();
  report.warnings = prepared.split.warnings;
  report.clean.name = "clean";
  ArmResult arm;
  arm.name = f.attack_name;
  for (const auto& e : attacked.edges()) arm.flips += clean.has_edge(e.u, e.v) ? 0 : 1;
  for (const auto& e : clean.edges()) arm.flips += attacked.has_edge(e.u, e.v) ? 0 : 1;
  arm.budget = perturbation_budget(clean.num_edges(), f.cfg.epsilon);
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < f.cfg.runs; ++r) {
    TargetConfig t = f.cfg.target;
    t.seed = f.cfg.target_seed + static_cast<std::uint64_t>(r);
    report.clean.runs.push_back(evaluate_target(clean, features, prepared.split, t));
    arm.runs.push_back(evaluate_target(attacked, features, prepared.split, t));
  }
  report.timings["target_training"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.clean.trimmed_mean = trimmed_mean(report.clean.runs);
  arm.trimmed_mean = trimmed_mean(arm.runs);
  report.attacks.push_back(arm);

  const fs::path out = f.out_file.empty() ? fs::path(f.cfg.output_dir) / "results.json" : f.out_file;
  write_json(report.to_json(), out);
  std::cout << "clean " << report.clean.trimmed_mean << "  " << arm.name << ' ' << arm.trimmed_mean << '\n';
  return 0;
}

int cmd_reproduce(Flags& f, const std::string& dataset, const std::vector<std::string>& explicit_options) {
  if (!is_known_dataset(dataset)) throw ValidationError("--dataset must be one of cora, citeseer, cora-ml");
  // Dataset-specific K and delta apply unless given explicitly.
  const auto defaults = RunConfig::defaults_for(dataset);
  f.cfg.dataset_name = dataset;
  auto given = [&](const std::string& name) {
    return std::find(explicit_options.begin(), explicit_options.end(), name) != explicit_options.end();
  };
  if (!given("--K")) f.cfg.propagation.K = defaults.propagation.K;
  if (!given("--delta")) f.cfg.propagation.delta = defaults.propagation.delta;
  if (f.cfg.dataset_dir.empty()) f.cfg.dataset_dir = fs::path(f.data_root) / dataset;
  f.cfg.validate();

  const auto report = run_experiment(f.cfg);
  const fs::path dir = f.cfg.output_dir;
  write_json(report.to_json(), f.out_file.empty() ? dir / "results.json" : f.out_file);
  write_text(config_echo(f.cfg), dir / "config.echo");
  std::cout << "clean " << report.clean.trimmed_mean;
  for (const auto& a : report.attacks) std::cout << "  " << a.name << ' ' << a.trimmed_mean;
  std::cout << '\n';
  return 0;
}

int cmd_heatmap(Flags& f) {
  require_data(f);
  f.cfg.propagation.validate();
  if (f.out_file.empty()) throw ValidationError("--out is required");
  const auto data = largest_connected_component(load_dataset(f.cfg.dataset_dir));
  const auto hat_a = normalize_adjacency<double>(data.graph, SelfLoops::without);
  const auto aphi = propagation_matrix(hat_a, f.cfg.propagation.delta, f.cfg.propagation.gamma, f.cfg.propagation.K);
  export_propagation_heatmap(aphi, f.out_file);
  const double reached = static_cast<double>((aphi.array() > 0.0).count()) / static_cast<double>(aphi.size());
  std::cout << "fraction of entries above -12: " << reached << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Splice config-file tokens in right after the subcommand name.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        const auto tokens = config_tokens(args[i + 1]);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        const auto at = args.empty() ? args.begin() : args.begin() + 1;
        args.insert(at, tokens.begin(), tokens.end());
        break;
      }
    }
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  const std::vector<std::string> explicit_options = [&] {
    std::vector<std::string> names;
    for (const auto& a : args) {
      if (a.rfind("--", 0) == 0) names.push_back(a.substr(0, a.find('=')));
    }
    return names;
  }();

  CLI::App app{"Poisoning attacks on attribute-incomplete graphs"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "Flat 'key = value' file of flags; command-line flags take precedence");
  Flags f;
  std::string dataset;

  auto* mask = app.add_subcommand("mask", "Generate a missingness mask");
  add_dataset_options(mask, f);
  add_mask_options(mask, f);
  mask->add_option("--out", f.out_file, "Output mask.tsv");
  mask->add_flag("--allow-empty", f.allow_empty, "Write a mask with no missing entries");

  auto* attack = app.add_subcommand("attack", "Run the poisoning attack");
  add_dataset_options(attack, f);
  add_mask_options(attack, f);
  add_split_options(attack, f);
  add_propagation_options(attack, f);
  add_attack_options(attack, f);
  attack->add_option("--out-dir", f.cfg.output_dir, "Directory for diff.txt, edges.tsv, attack.json");
  attack->add_option("--save-head", f.head_file, "Dump the trained surrogate head");

  auto* eval = app.add_subcommand("eval", "Train target GCNs on clean and attacked graphs");
  add_dataset_options(eval, f);
  add_mask_options(eval, f);
  add_split_options(eval, f);
  add_target_options(eval, f);
  eval->add_option("--epsilon", f.cfg.epsilon, "Budget fraction recorded in the report");
  eval->add_option("--attacked", f.attacked_edges, "Attacked edges.tsv");
  eval->add_option("--diff", f.diff_file, "Perturbation diff to replay instead of --attacked");
  eval->add_option("--name", f.attack_name, "Report key for the attacked graph");
  eval->add_option("--out", f.out_file, "results.json path");
  eval->add_option("--out-dir", f.cfg.output_dir, "Directory for results.json");

  auto* reproduce = app.add_subcommand("reproduce", "Mask, attack, baselines and evaluation for a named dataset");
  reproduce->add_option("--dataset", dataset, "cora, citeseer or cora-ml")->required();
  reproduce->add_option("--data-root", f.data_root, "Directory holding one folder per dataset");
  add_dataset_options(reproduce, f);
  add_mask_options(reproduce, f);
  add_split_options(reproduce, f);
  add_propagation_options(reproduce, f);
  add_attack_options(reproduce, f);
  add_target_options(reproduce, f);
  reproduce->add_flag("--reattack", f.cfg.reattack, "Recompute the attacks for every run");
  reproduce->add_flag("!--no-dice", f.cfg.run_dice, "Skip the DICE baseline");
  reproduce->add_flag("!--no-mean", f.cfg.run_mean, "Skip the mean-imputation baseline");
  reproduce->add_option("--out-dir", f.cfg.output_dir, "Output directory");
  reproduce->add_option("--out", f.out_file, "results.json path");

  auto* heatmap = app.add_subcommand("heatmap", "Export the log-scaled propagation matrix as CSV");
  add_dataset_options(heatmap, f);
  heatmap->add_option("--K", f.cfg.propagation.K, "Propagation layers");
  heatmap->add_option("--delta", f.cfg.propagation.delta, "Decay scale");
  heatmap->add_option("--gamma", f.cfg.propagation.gamma, "Per-layer decay rate");
  heatmap->add_option("--out", f.out_file, "Output CSV");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    finalize(f);
    if (*mask) return cmd_mask(f);
    if (*attack) return cmd_attack(f);
    if (*eval) return cmd_eval(f);
    if (*reproduce) return cmd_reproduce(f, dataset, explicit_options);
    if (*heatmap) return cmd_heatmap(f);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
