#pragma once

#include "ifmix/mixer.hpp"
#include "ifmix/trainer.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ifmix {

enum class PlotKind { beta_density, loss_curve, sweep_bars };

std::string to_string(PlotKind k);
PlotKind parse_plot_kind(const std::string& s);

struct PlotData {
  std::string csv;
  std::string svg;
};

/// `points` evenly spaced x in [0, 1], one density column per Beta.
PlotData beta_density_plot(std::span<const BetaParams> betas, int points = 1001);

struct NamedCurve {
  std::string name;
  std::vector<EpochRecord> epochs;
};

/// Wide CSV: epoch, then <name>_train_loss and <name>_val_acc per curve.
PlotData loss_curve_plot(std::span<const NamedCurve> curves);

PlotData sweep_bars_plot(std::span<const SweepRow> rows);
std::vector<SweepRow> sweep_from_csv(const std::string& text);

/// Writes `<prefix>.csv` and `<prefix>.svg`.
void write_plot(const PlotData& data, const std::filesystem::path& prefix);

} // namespace ifmix
