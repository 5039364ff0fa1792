#include "ifmix/cli.hpp"

#include "ifmix/config.hpp"
#include "ifmix/plot.hpp"
#include "ifmix/recovery.hpp"
#include "ifmix/trainer.hpp"
#include "ifmix/tudataset.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace ifmix {

namespace {

struct Overrides {
  std::optional<std::string> data_dir, dataset, features, arch, augment, out;
  std::optional<int> epochs, folds, runs, layers, hidden, batch_size, mix_layer;
  std::optional<double> lr, dropout, alpha, beta, ratio, weight_decay;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> limit;
  bool shuffle_nodes = false;
  bool quiet = false;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--data-dir", o.data_dir, "Directory holding the dataset files");
  app->add_option("--dataset", o.dataset, "Dataset name (file prefix)");
  app->add_option("--features", o.features, "Node features: labels, degree or auto");
  app->add_option("--limit", o.limit, "Keep only the first N graphs");
  app->add_option("--arch", o.arch, "Model: gcn or gin");
  app->add_option("--layers", o.layers, "Message-passing layers");
  app->add_option("--hidden", o.hidden, "Hidden width");
  app->add_option("--dropout", o.dropout, "Dropout after the dense head layer");
  app->add_option("--augment", o.augment,
                  "none, if_mixup, if_mixup_shuffled, drop_edge, drop_node, mixup_graph or manifold_mixup");
  app->add_option("--alpha", o.alpha, "Beta distribution alpha for mixing");
  app->add_option("--beta", o.beta, "Beta distribution beta for mixing");
  app->add_option("--ratio", o.ratio, "Drop ratio for drop_edge / drop_node");
  app->add_option("--mix-layer", o.mix_layer, "Layer for manifold_mixup (0 draws one per pair)");
  app->add_option("--lr", o.lr, "Initial learning rate");
  app->add_option("--batch-size", o.batch_size, "Mini-batch size");
  app->add_option("--weight-decay", o.weight_decay, "Decoupled weight decay");
  app->add_option("--epochs", o.epochs, "Training epochs");
  app->add_option("--folds", o.folds, "Cross-validation folds");
  app->add_option("--runs", o.runs, "Repeated cross-validation runs");
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--out", o.out, "Output directory");
  app->add_flag("--shuffle-nodes", o.shuffle_nodes, "Shuffle one graph's node order before input mixing");
  app->add_flag("--quiet", o.quiet, "No per-epoch log lines");
}

RunConfig resolve_config(const std::string& path, const Overrides& o) {
  RunConfig c = path.empty() ? RunConfig{} : load_run_config(path);
  if (o.data_dir) c.dataset.dir = *o.data_dir;
  if (o.dataset) c.dataset.name = *o.dataset;
  if (o.features) c.dataset.features = *o.features;
  if (o.limit) c.dataset.limit = *o.limit;
  if (o.arch) c.train.model.arch = parse_arch(*o.arch);
  if (o.layers) c.train.model.layers = *o.layers;
  if (o.hidden) c.train.model.hidden = *o.hidden;
  if (o.dropout) c.train.model.dropout = *o.dropout;
  if (o.augment) c.train.augment.kind = parse_augment_kind(*o.augment);
  if (o.alpha) c.train.augment.beta.alpha = *o.alpha;
  if (o.beta) c.train.augment.beta.beta = *o.beta;
  if (o.ratio) c.train.augment.ratio = *o.ratio;
  if (o.mix_layer) c.train.augment.mix_layer = *o.mix_layer;
  if (o.lr) c.train.lr0 = *o.lr;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.weight_decay) c.train.weight_decay = *o.weight_decay;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.folds) c.train.folds = *o.folds;
  if (o.runs) c.train.runs = *o.runs;
  if (o.seed) c.train.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.shuffle_nodes) c.train.shuffle_nodes_before_mix = true;
  c.train.validate();
  if (c.dataset.dir.empty() || c.dataset.name.empty()) {
    throw std::invalid_argument("no dataset given: set dataset.dir and dataset.name or pass --data-dir and --dataset");
  }
  return c;
}

GraphDataset load_dataset(const std::string& dir, const std::string& name, const std::string& features,
                          std::size_t limit = 0) {
  GraphDataset ds = load_tudataset({dir, name}, features);
  if (limit > 0 && limit < ds.size()) ds.items.resize(limit);
  return ds;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EpochCallback epoch_logger(std::ostream& out, bool quiet) {
  if (quiet) return {};
  return [&out](const EpochRecord& r) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch %4d  lr %.6g  train_loss %.6f  val_acc %.4f\n", r.epoch + 1, r.lr,
                  r.train_loss, r.val_acc);
    out << line << std::flush;
  };
}

FeatureBasis basis_from_vocabulary(const Matrix& vocabulary) {
  FeatureBasis fb;
  fb.vocabulary = vocabulary;
  const auto chosen = independent_row_subset(vocabulary);
  fb.basis.resize(static_cast<Index>(chosen.size()), vocabulary.cols());
  for (std::size_t k = 0; k < chosen.size(); ++k) fb.basis.row(static_cast<Index>(k)) = vocabulary.row(chosen[k]);
  return fb;
}

bool close_graph(const Graph& a, const Graph& b, double tol) {
  if (a.num_nodes() != b.num_nodes() || a.feature_dim() != b.feature_dim()) return false;
  return a.weights == b.weights && (a.features - b.features).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------

int cmd_stats(const std::string& dir, const std::string& name, const std::string& features,
              const std::string& json_path, std::ostream& out) {
  const GraphDataset ds = load_dataset(dir, name, features);
  const DatasetStats s = dataset_stats(ds);
  out << format_stats_text(s);
  if (!json_path.empty()) write_text(json_path, stats_to_json(s) + "\n");
  return kExitOk;
}

struct MixArgs {
  std::string dir, name, features = "auto", out, out_name;
  std::uint64_t seed = 0;
  double alpha = 1.0, beta = 1.0;
  std::optional<std::size_t> i, j;
  std::optional<double> lambda;
};

int cmd_mix(const MixArgs& a, std::ostream& out) {
  const GraphDataset ds = load_dataset(a.dir, a.name, a.features);
  if (ds.size() < 2) throw std::invalid_argument(a.name + ": need at least two graphs to mix");
  Rng rng(a.seed);
  const BetaParams beta{a.alpha, a.beta};
  beta.validate();
  const std::size_t i = a.i ? *a.i : rng.index(ds.size());
  if (i >= ds.size()) throw std::out_of_range("graph index " + std::to_string(i) + " outside [0, " + std::to_string(ds.size()) + ")");
  std::size_t j = 0;
  if (a.j) {
    j = *a.j;
  } else {
    // Identical sources leave the ratio undetermined; prefer a distinct graph.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      j = rng.index(ds.size());
      if (!(ds.graph(j) == ds.graph(i))) break;
    }
  }
  if (j >= ds.size()) throw std::out_of_range("graph index " + std::to_string(j) + " outside [0, " + std::to_string(ds.size()) + ")");
  double lambda = 0.0;
  if (a.lambda) {
    lambda = *a.lambda;
  } else {
    do {
      lambda = sample_lambda(beta, rng);
    } while (std::abs(lambda - 0.5) < 1e-6);
  }
  MixedSampleFile m;
  m.sample = mix_samples(ds, i, j, lambda);
  m.vocabulary = feature_vocabulary(ds).vocabulary;
  m.source_dir = fs::absolute(a.dir).string();
  m.source_name = a.name;
  m.feature_mode = a.features;
  const std::string out_name = a.out_name.empty() ? a.name + "_mixed" : a.out_name;
  write_mixed_sample(m, {a.out, out_name});
  OrderedJson j_out;
  j_out["lambda"] = lambda;
  j_out["source_ids"] = {i, j};
  j_out["nodes"] = m.sample.graph.num_nodes();
  j_out["label"] = std::vector<double>(m.sample.label.p.data(), m.sample.label.p.data() + m.sample.label.p.size());
  j_out["files"] = (fs::path(a.out) / out_name).string() + "_*";
  out << j_out.dump(2) << '\n';
  return kExitOk;
}

struct RecoverArgs {
  std::string dir, name, mode = "auto";
  double tol = 1e-9;
  bool verify = false;
};

int cmd_recover(const RecoverArgs& a, std::ostream& out, std::ostream& err) {
  const MixedSampleFile m = read_mixed_sample({a.dir, a.name});
  const bool independent = check_linear_independence(m.vocabulary).independent;
  RecoveryMode mode = RecoveryMode::independent;
  if (a.mode == "basis" || (a.mode == "auto" && !independent)) {
    mode = RecoveryMode::basis;
  } else if (a.mode != "independent" && a.mode != "auto") {
    throw std::invalid_argument("unknown recovery mode '" + a.mode + "'");
  }
  std::optional<GraphDataset> source;
  auto load_source = [&]() -> const GraphDataset& {
    if (!source) source = load_dataset(m.source_dir, m.source_name, m.feature_mode);
    return *source;
  };
  const FeatureBasis basis =
      mode == RecoveryMode::basis ? feature_vocabulary(load_source()) : basis_from_vocabulary(m.vocabulary);
  const RecoveredPair rp = recover_pair(m.sample.graph, basis, mode, a.tol);

  OrderedJson j;
  j["mode"] = to_string(mode);
  j["identical_sources"] = rp.sources_identical();
  j["lambda"] = rp.lambda ? OrderedJson(*rp.lambda) : OrderedJson(nullptr);
  j["first"] = {{"nodes", rp.a.num_nodes()}, {"edges", rp.a.num_edges()}};
  j["second"] = {{"nodes", rp.b.num_nodes()}, {"edges", rp.b.num_edges()}};
  int code = kExitOk;
  if (a.verify) {
    const GraphDataset& ds = load_source();
    const auto [i, k] = m.sample.source_ids;
    if (i >= ds.size() || k >= ds.size()) throw std::out_of_range("sidecar source ids outside the source dataset");
    const Graph& ga = ds.graph(i);
    const Graph& gb = ds.graph(k);
    auto matches = [&](const RecoveredPair& p) {
      const bool graphs = close_graph(p.a, ga, a.tol) && close_graph(p.b, gb, a.tol);
      const bool ratio = !p.lambda || std::abs(*p.lambda - m.sample.lambda) <= a.tol;
      return graphs && ratio;
    };
    const bool ok = matches(rp) || matches(rp.swapped());
    j["verified"] = ok;
    if (!ok) {
      err << "recover: " << a.name << " does not decompose into source graphs " << i << " and " << k << '\n';
      code = kExitDomainError;
    }
  }
  out << j.dump(2) << '\n';
  return code;
}

int cmd_audit(const std::string& dir, const std::string& name, const std::string& features, std::size_t trials,
              double alpha, double beta, std::uint64_t seed, const std::string& json_path, bool strict,
              std::ostream& out) {
  const GraphDataset ds = load_dataset(dir, name, features);
  Rng rng(seed);
  const AuditReport r = intrusion_audit(ds, trials, {alpha, beta}, rng);
  const std::string text = to_json(r);
  out << text << '\n';
  if (!json_path.empty()) write_text(json_path, text + "\n");
  if (strict && (!r.assumption_satisfied || r.collisions > 0 || r.recovery_failures > 0)) return kExitDomainError;
  return kExitOk;
}

int cmd_check_independence(const std::string& dir, const std::string& name, const std::string& features,
                           std::ostream& out) {
  const GraphDataset ds = load_dataset(dir, name, features);
  const FeatureBasis fb = feature_vocabulary(ds);
  const auto v = check_linear_independence(fb.vocabulary);
  OrderedJson j;
  j["dataset"] = name;
  j["vocabulary_size"] = fb.vocabulary.rows();
  j["feature_dim"] = fb.dim();
  j["span_rank"] = fb.rank();
  j["vocabulary_independent"] = v.independent;
  if (!v.independent) {
    const auto t = check_coefficient_independence(fb);
    j["coefficient_rank"] = t.rank;
    j["coefficients_independent"] = t.independent;
    j["recovery_mode"] = t.independent ? "basis" : "none";
  } else {
    j["recovery_mode"] = "independent";
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& c, bool quiet, std::ostream& out) {
  const GraphDataset ds = load_dataset(c.dataset.dir, c.dataset.name, c.dataset.features, c.dataset.limit);
  const int parts = std::max(2, static_cast<int>(std::lround(1.0 / c.val_fraction)));
  Rng split_rng = Rng::derive(c.train.seed, {0xF01DULL});
  const auto folds = stratified_folds(ds, parts, split_rng);
  std::vector<std::size_t> train_idx;
  for (std::size_t f = 1; f < folds.size(); ++f) train_idx.insert(train_idx.end(), folds[f].begin(), folds[f].end());
  std::sort(train_idx.begin(), train_idx.end());
  Rng rng = Rng::derive(c.train.seed, {0});
  const TrainResult r = train_single(ds.subset(train_idx), ds.subset(folds[0]), c.train, rng, epoch_logger(out, quiet));
  const fs::path dir = c.output_dir;
  write_text(dir / "metrics.csv", metrics_to_csv(r.epochs));
  save_checkpoint((dir / "checkpoint.json").string(), c.train.model, r.params);
  OrderedJson s;
  s["dataset"] = c.dataset.name;
  s["train_size"] = train_idx.size();
  s["val_size"] = folds[0].size();
  s["train_acc"] = r.train_acc;
  s["val_acc"] = std::isnan(r.val_acc) ? OrderedJson(nullptr) : OrderedJson(r.val_acc);
  s["final_train_loss"] = r.epochs.back().train_loss;
  s["config"] = run_config_to_json(c);
  write_text(dir / "summary.json", s.dump(2) + "\n");
  out << "train_acc " << r.train_acc << "  val_acc " << r.val_acc << "\nwrote " << (dir / "metrics.csv").string()
      << ", summary.json, checkpoint.json\n";
  return kExitOk;
}

int cmd_cv(const RunConfig& c, bool quiet, std::ostream& out) {
  const GraphDataset ds = load_dataset(c.dataset.dir, c.dataset.name, c.dataset.features, c.dataset.limit);
  const CvResult r = cross_validate(ds, c.train, epoch_logger(out, quiet));
  const fs::path dir = c.output_dir;
  write_text(dir / "metrics.csv", metrics_to_csv(r.curve));
  write_text(dir / "summary.json", cv_summary_json(r, c.train) + "\n");
  char line[160];
  std::snprintf(line, sizeof line, "%s: accuracy %.4f +- %.4f over %d runs of %d folds (best epoch %d: %.4f)\n",
                c.dataset.name.c_str(), r.mean, r.std, c.train.runs, c.train.folds, r.best_epoch + 1, r.best_epoch_acc);
  out << line;
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, const std::string& axis, std::ostream& out) {
  const GraphDataset ds = load_dataset(c.dataset.dir, c.dataset.name, c.dataset.features, c.dataset.limit);
  const auto rows = run_sweep(ds, c.train, parse_sweep_axis(axis));
  const fs::path prefix = fs::path(c.output_dir) / ("sweep_" + axis);
  write_plot(sweep_bars_plot(rows), prefix);
  out << sweep_to_csv(rows);
  return kExitOk;
}

BetaParams parse_beta_pair(const std::string& s) {
  const auto sep = s.find_first_of(":,");
  if (sep == std::string::npos) throw std::invalid_argument("Beta parameters '" + s + "' must look like alpha:beta");
  BetaParams b{std::stod(s.substr(0, sep)), std::stod(s.substr(sep + 1))};
  b.validate();
  return b;
}

int cmd_plot(const std::vector<std::string>& inputs, std::string kind, const std::string& out_prefix,
             const std::vector<std::string>& betas, std::ostream& out) {
  if (kind.empty()) {
    if (inputs.front() == "beta") {
      kind = "beta_density";
    } else {
      const std::string head = read_text(inputs.front()).substr(0, 64);
      kind = head.rfind("dataset,", 0) == 0 ? "sweep_bars" : "loss_curve";
    }
  }
  PlotData data;
  switch (parse_plot_kind(kind)) {
  case PlotKind::beta_density: {
    std::vector<BetaParams> params;
    for (const auto& b : betas) params.push_back(parse_beta_pair(b));
    if (params.empty()) params = default_sweep_betas();
    data = beta_density_plot(params);
    break;
  }
  case PlotKind::loss_curve: {
    std::vector<NamedCurve> curves;
    for (const auto& path : inputs) {
      fs::path p(path);
      std::string name = p.stem().string();
      if (name == "metrics" && p.has_parent_path()) name = p.parent_path().filename().string();
      try {
        curves.push_back({name, metrics_from_csv(read_text(p))});
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
      }
    }
    data = loss_curve_plot(curves);
    break;
  }
  case PlotKind::sweep_bars: {
    std::vector<SweepRow> rows;
    for (const auto& path : inputs) {
      try {
        const auto r = sweep_from_csv(read_text(path));
        rows.insert(rows.end(), r.begin(), r.end());
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
      }
    }
    data = sweep_bars_plot(rows);
    break;
  }
  }
  write_plot(data, out_prefix);
  out << "wrote " << out_prefix << ".csv and " << out_prefix << ".svg\n";
  return kExitOk;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph mixing, recovery and GNN training toolkit", "ifmix"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string dir, name, features = "auto", json_path;
  auto* stats = app.add_subcommand("stats", "Dataset statistics and comparison with published figures");
  stats->add_option("dir", dir, "Dataset directory")->required();
  stats->add_option("name", name, "Dataset name")->required();
  stats->add_option("--features", features, "Node features: labels, degree or auto")->capture_default_str();
  stats->add_option("--json", json_path, "Also write the statistics as JSON to this file");

  MixArgs mix;
  auto* mixc = app.add_subcommand("mix", "Mix two graphs of a dataset and write the result");
  mixc->add_option("dir", mix.dir, "Dataset directory")->required();
  mixc->add_option("name", mix.name, "Dataset name")->required();
  mixc->add_option("--features", mix.features, "Node features: labels, degree or auto")->capture_default_str();
  mixc->add_option("--seed", mix.seed, "Random seed")->capture_default_str();
  mixc->add_option("--alpha", mix.alpha, "Beta distribution alpha")->capture_default_str();
  mixc->add_option("--beta", mix.beta, "Beta distribution beta")->capture_default_str();
  mixc->add_option("--first", mix.i, "Index of the first graph (default random)");
  mixc->add_option("--second", mix.j, "Index of the second graph (default random)");
  mixc->add_option("--lambda", mix.lambda, "Fixed mixing ratio instead of a Beta draw");
  mixc->add_option("--out", mix.out, "Output directory")->required();
  mixc->add_option("--out-name", mix.out_name, "Output file prefix (default NAME_mixed)");

  RecoverArgs rec;
  auto* recc = app.add_subcommand("recover", "Recover the ratio and both source graphs from a mixed graph");
  recc->add_option("dir", rec.dir, "Directory holding the mixed-graph files")->required();
  recc->add_option("name", rec.name, "Mixed-graph file prefix")->required();
  recc->add_option("--mode", rec.mode, "independent, basis or auto")->capture_default_str();
  recc->add_option("--tol", rec.tol, "Numerical tolerance")->capture_default_str();
  recc->add_flag("--verify", rec.verify, "Compare against the source graphs named in the sidecar");

  std::size_t trials = 1000;
  double alpha = 1.0, beta = 1.0;
  std::uint64_t seed = 0;
  bool strict = false;
  auto* audit = app.add_subcommand("audit", "Mix random pairs and check recovery and label collisions");
  audit->add_option("dir", dir, "Dataset directory")->required();
  audit->add_option("name", name, "Dataset name")->required();
  audit->add_option("--features", features, "Node features: labels, degree or auto")->capture_default_str();
  audit->add_option("--trials", trials, "Number of mixes")->capture_default_str();
  audit->add_option("--alpha", alpha, "Beta distribution alpha")->capture_default_str();
  audit->add_option("--beta", beta, "Beta distribution beta")->capture_default_str();
  audit->add_option("--seed", seed, "Random seed")->capture_default_str();
  audit->add_option("--json", json_path, "Also write the report to this file");
  audit->add_flag("--strict", strict, "Exit 1 on any collision, failure or violated assumption");

  auto* indep = app.add_subcommand("check-independence", "Check the feature-vocabulary independence assumptions");
  indep->add_option("dir", dir, "Dataset directory")->required();
  indep->add_option("name", name, "Dataset name")->required();
  indep->add_option("--features", features, "Node features: labels, degree or auto")->capture_default_str();

  std::string config_path;
  Overrides train_o, cv_o, sweep_o;
  auto* train = app.add_subcommand("train", "Train on a stratified holdout split");
  train->add_option("config", config_path, "JSON configuration file");
  add_overrides(train, train_o);

  auto* cv = app.add_subcommand("cv", "Repeated stratified cross-validation");
  cv->add_option("config", config_path, "JSON configuration file");
  add_overrides(cv, cv_o);

  std::string axis;
  auto* sweep = app.add_subcommand("sweep", "Cross-validated sweep over Beta settings or depth");
  sweep->add_option("config", config_path, "JSON configuration file");
  sweep->add_option("--axis", axis, "beta or layers")->required()->check(CLI::IsMember({"beta", "layers"}));
  add_overrides(sweep, sweep_o);

  std::vector<std::string> plot_inputs, plot_betas;
  std::string plot_kind, plot_out;
  auto* plot = app.add_subcommand("plot", "Emit CSV and SVG plot data");
  plot->add_option("inputs", plot_inputs, "'beta', metrics CSV files, or sweep CSV files")->required();
  plot->add_option("--kind", plot_kind, "beta_density, loss_curve or sweep_bars (default inferred)")
      ->check(CLI::IsMember({"beta_density", "loss_curve", "sweep_bars"}));
  plot->add_option("--betas", plot_betas, "Beta settings as alpha:beta (beta_density only)");
  plot->add_option("--out", plot_out, "Output prefix; writes PREFIX.csv and PREFIX.svg")->required();

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "ifmix: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    return kExitUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "ifmix: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (stats->parsed()) return cmd_stats(dir, name, features, json_path, out);
    if (mixc->parsed()) return cmd_mix(mix, out);
    if (recc->parsed()) return cmd_recover(rec, out, err);
    if (audit->parsed()) return cmd_audit(dir, name, features, trials, alpha, beta, seed, json_path, strict, out);
    if (indep->parsed()) return cmd_check_independence(dir, name, features, out);
    if (train->parsed()) return cmd_train(resolve_config(config_path, train_o), train_o.quiet, out);
    if (cv->parsed()) return cmd_cv(resolve_config(config_path, cv_o), cv_o.quiet, out);
    if (sweep->parsed()) return cmd_sweep(resolve_config(config_path, sweep_o), axis, out);
    if (plot->parsed()) return cmd_plot(plot_inputs, plot_kind, plot_out, plot_betas, out);
  } catch (const std::exception& e) {
    err << "ifmix: " << e.what() << '\n';
    return kExitDomainError;
  }
  err << app.help();
  return kExitUsage;
}

} // namespace ifmix
