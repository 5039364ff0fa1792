#pragma once

#include "ifmix/augment.hpp"
#include "ifmix/gnn.hpp"
#include "ifmix/graph.hpp"
#include "ifmix/rng.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ifmix {

struct TrainConfig {
  ModelConfig model;
  AugmentSpec augment;
  double lr0 = 0.0005;
  int batch_size = 32;
  int epochs = 350;
  int folds = 10;
  int runs = 3;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
  bool shuffle_nodes_before_mix = false;
  /// Redraws input-mixing ratios within `guard_tol` of 0.5.
  bool intrusion_guard = true;
  double guard_tol = 1e-6;

  void validate() const;
};

/// lr0 * 0.5^floor(epoch / 50).
double lr_at_epoch(double lr0, int epoch);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One AdamW update with decoupled weight decay. State is sized on first use.
void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
                double weight_decay);
void adamw_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr, double weight_decay);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0; ///< mean loss over the epoch's (augmented) training stream
  double val_acc = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> epochs;
  double train_acc = 0.0; ///< clean training set, final parameters
  double val_acc = std::numeric_limits<double>::quiet_NaN();
};

/// Argmax prediction, ties toward the lower class index.
Index predict(const Graph& g, const ModelParams& params, const ModelConfig& config);
double accuracy(const GraphDataset& ds, const ModelParams& params, const ModelConfig& config);

/// Training items for one epoch. Input-mixed graphs are stored in `storage`;
/// items point into it or into `train`.
struct EpochStream {
  std::vector<Graph> storage;
  std::vector<BatchItem> items;
  std::vector<double> lambdas; ///< one per mixed pair
};

EpochStream build_epoch(const GraphDataset& train, const TrainConfig& cfg, Rng& rng);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains from a fresh initialisation. `val` may be empty.
TrainResult train_single(const GraphDataset& train, const GraphDataset& val, const TrainConfig& cfg, Rng& rng,
                         const EpochCallback& on_epoch = {});

/// Class-stratified folds: indices sorted by class, shuffled within class,
/// then dealt round-robin.
std::vector<std::vector<std::size_t>> stratified_folds(const GraphDataset& ds, int folds, Rng& rng);

struct FoldResult {
  int run = 0;
  int fold = 0;
  double val_acc = 0.0;
  double train_acc = 0.0;
  std::vector<EpochRecord> epochs;
};

struct CvResult {
  std::string dataset;
  std::vector<FoldResult> folds;
  std::vector<double> run_means;    ///< fold-averaged final accuracy per run
  double mean = 0.0;                ///< over runs
  double std = 0.0;                 ///< population std over runs
  std::vector<EpochRecord> curve;   ///< per-epoch loss and accuracy averaged over every fold and run
  int best_epoch = 0;               ///< epoch with the highest averaged validation accuracy
  double best_epoch_acc = 0.0;
};

CvResult cross_validate(const GraphDataset& ds, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

double mean_of(std::span<const double> xs);
/// Population standard deviation.
double std_of(std::span<const double> xs);

enum class SweepAxis { beta, layers };

SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepRow {
  std::string dataset;
  std::string method;
  std::string setting;
  double mean = 0.0;
  double std = 0.0;
};

std::vector<BetaParams> default_sweep_betas();

/// Beta sweep: readout mixing and input mixing at each Beta setting. Layer
/// sweep: no augmentation, readout mixing and input mixing at each depth.
/// Every cell is a full cross-validation with the remaining settings of `cfg`.
std::vector<SweepRow> run_sweep(const GraphDataset& ds, const TrainConfig& cfg, SweepAxis axis,
                                const std::vector<BetaParams>& betas = default_sweep_betas(),
                                const std::vector<int>& depths = {5, 8});

std::string sweep_to_csv(std::span<const SweepRow> rows);

/// CSV with columns epoch, train_loss, val_acc.
std::string metrics_to_csv(std::span<const EpochRecord> epochs);
std::vector<EpochRecord> metrics_from_csv(const std::string& text);
std::string cv_summary_json(const CvResult& r, const TrainConfig& cfg);

/// The hyperparameter grid the experiments search over.
struct HyperGrid {
  std::vector<double> lr0{0.01, 0.0005};
  std::vector<int> hidden{64, 128};
  std::vector<int> batch_size{32, 128};
  std::vector<double> dropout{0.0, 0.5};
  std::vector<double> drop_ratio{0.2, 0.4};
  std::vector<int> layers{5, 8};
  std::vector<BetaParams> beta{{1.0, 1.0}, {2.0, 2.0}, {20.0, 1.0}};
};

/// Every configuration of the grid relevant to `base.augment.kind`.
std::vector<TrainConfig> expand_grid(const TrainConfig& base, const HyperGrid& grid = {});

} // namespace ifmix
