#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avf/config.hpp"
#include "avf/model.hpp"
#include "avf/synthetic.hpp"

namespace avf {

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> per_class_recall;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t total = 0;
};

/// Predictions use class-reweighted scores (argmax, lowest index on ties).
Metrics evaluate(const FusionModel& model, const SyntheticDataset& ds,
                 const std::vector<std::size_t>& indices, const std::vector<double>& class_weights);

struct TrainingLog {
  /// Mean training cross-entropy per epoch (as accumulated during the epoch).
  std::vector<double> epoch_loss;
};

/// Mini-batch gradient descent over `train_indices` with per-epoch seeded
/// shuffling. Throws NumericalDivergence if a loss turns non-finite.
TrainingLog train_model(FusionModel& model, const SyntheticDataset& ds,
                        const std::vector<std::size_t>& train_indices, const ExperimentConfig& cfg,
                        Rng& rng);

/// Everything one experiment run produces.
struct ExperimentResult {
  Metrics metrics;
  TrainingLog log;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

/// The fixed chain of RNG streams derived from cfg.seed.
struct ExperimentStreams {
  Rng data;
  Rng init;
  Rng split;
  Rng train;
  explicit ExperimentStreams(std::uint64_t seed);
};

/// Generate data, build and train the configured model, evaluate on the
/// held-out 20%. When `model_out` is non-null the trained model is stored there.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::optional<FusionModel>* model_out = nullptr);

/// run_experiment plus files under out_dir: checkpoint.avfckpt, report.txt,
/// confusion.csv.
ExperimentResult run_experiment_to_dir(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir);

/// Rebuilds the config's dataset and split, restores the checkpoint and
/// evaluates on the held-out split.
Metrics evaluate_checkpoint(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);

std::string format_report(const ExperimentConfig& cfg, const ExperimentResult& r);
std::string format_metrics(const Metrics& m);
std::string format_confusion_csv(const Metrics& m);

}  // namespace avf
