#include "avf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "avf/checkpoint.hpp"
#include "avf/classifier.hpp"
#include "avf/error.hpp"
#include "avf/feature_io.hpp"

namespace avf {
namespace {

std::string fixed(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

}  // namespace

ExperimentStreams::ExperimentStreams(std::uint64_t seed)
    : data(0), init(0), split(0), train(0) {
  Rng master(seed);
  data = master.split();
  init = master.split();
  split = master.split();
  train = master.split();
}

Metrics evaluate(const FusionModel& model, const SyntheticDataset& ds,
                 const std::vector<std::size_t>& indices, const std::vector<double>& class_weights) {
  if (indices.empty()) throw EmptyDataset("evaluation split is empty");
  const ClassWeights weights(class_weights);
  Metrics m;
  m.confusion.assign(ds.classes, std::vector<std::size_t>(ds.classes, 0));
  for (std::size_t idx : indices) {
    const Sample& s = ds.samples.at(idx);
    const ReweightedScores r = apply_class_weights(model.predict(s.audio, s.visual), weights);
    ++m.confusion[s.label][r.predicted];
  }
  m.total = indices.size();
  std::size_t trace = 0;
  m.per_class_recall.assign(ds.classes, 0.0);
  for (std::size_t c = 0; c < ds.classes; ++c) {
    trace += m.confusion[c][c];
    std::size_t row = 0;
    for (std::size_t p = 0; p < ds.classes; ++p) row += m.confusion[c][p];
    m.per_class_recall[c] = row == 0 ? 0.0 : static_cast<double>(m.confusion[c][c]) / static_cast<double>(row);
  }
  m.accuracy = static_cast<double>(trace) / static_cast<double>(m.total);
  return m;
}

TrainingLog train_model(FusionModel& model, const SyntheticDataset& ds,
                        const std::vector<std::size_t>& train_indices, const ExperimentConfig& cfg,
                        Rng& rng) {
  if (train_indices.empty()) throw EmptyDataset("training split is empty");
  TrainingLog log;
  std::vector<std::size_t> order = train_indices;
  GradientBuffer grads = model.make_gradient_buffer();
  const std::size_t batch = std::min(cfg.batch_size, order.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, order.size());
      grads.zero();
      for (std::size_t i = start; i < stop; ++i) {
        const double loss = model.accumulate(ds.samples[order[i]], Mode::kTrain, rng, grads);
        if (!std::isfinite(loss)) {
          throw NumericalDivergence("loss is " + fixed(loss) + " at epoch " + std::to_string(epoch) +
                                    ", sample " + std::to_string(order[i]) +
                                    "; lower classifier.lr");
        }
        epoch_loss += loss;
      }
      model.apply_step(grads, cfg.lr / static_cast<double>(stop - start));
    }
    log.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return log;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::optional<FusionModel>* model_out) {
  validate(cfg);
  ExperimentStreams streams(cfg.seed);
  const SyntheticDataset ds = gen_synthetic(cfg, streams.data);
  FusionModel model(model_spec(cfg), streams.init);
  Split split = train_test_split(ds.samples.size(), streams.split);

  std::vector<std::size_t> train_idx = split.train;
  if (cfg.train_on_all) {
    train_idx.insert(train_idx.end(), split.test.begin(), split.test.end());
  }

  ExperimentResult r;
  r.log = train_model(model, ds, train_idx, cfg, streams.train);
  for (const auto& p : model.tensors()) require_finite(p.values, p.name.c_str());
  r.metrics = evaluate(model, ds, split.test, effective_class_weights(cfg));
  r.train_samples = train_idx.size();
  r.test_samples = split.test.size();
  if (model_out != nullptr) model_out->emplace(std::move(model));
  return r;
}

ExperimentResult run_experiment_to_dir(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::optional<FusionModel> model;
  ExperimentResult r = run_experiment(cfg, &model);
  save_checkpoint(out_dir / "checkpoint.avfckpt", model->tensors());
  write_text(out_dir / "report.txt", format_report(cfg, r));
  write_text(out_dir / "confusion.csv", format_confusion_csv(r.metrics));
  return r;
}

Metrics evaluate_checkpoint(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint) {
  validate(cfg);
  ExperimentStreams streams(cfg.seed);
  const SyntheticDataset ds = gen_synthetic(cfg, streams.data);
  FusionModel model(model_spec(cfg), streams.init);
  const Split split = train_test_split(ds.samples.size(), streams.split);
  restore_tensors(load_checkpoint(checkpoint), model.tensors());
  return evaluate(model, ds, split.test, effective_class_weights(cfg));
}

std::string format_metrics(const Metrics& m) {
  std::ostringstream out;
  out << "accuracy=" << fixed(m.accuracy) << '\n';
  out << "test_samples=" << m.total << '\n';
  std::size_t trace = 0;
  for (std::size_t c = 0; c < m.confusion.size(); ++c) trace += m.confusion[c][c];
  out << "correct=" << trace << '\n';
  for (std::size_t c = 0; c < m.per_class_recall.size(); ++c) {
    out << "recall." << c << '=' << fixed(m.per_class_recall[c]) << '\n';
  }
  return out.str();
}

std::string format_report(const ExperimentConfig& cfg, const ExperimentResult& r) {
  std::ostringstream out;
  out << "seed=" << cfg.seed << '\n'
      << "data.mode=" << to_string(cfg.data_mode) << '\n'
      << "audio.intra=" << to_string(cfg.audio_intra) << '\n'
      << "visual.intra=" << to_string(cfg.visual_intra) << '\n'
      << "fusion.cross=" << to_string(cfg.cross) << '\n'
      << "enhancement=" << to_string(cfg.enhancement) << '\n'
      << "epochs=" << cfg.epochs << '\n'
      << "train_samples=" << r.train_samples << '\n';
  out << format_metrics(r.metrics);
  out << "final_train_loss=" << (r.log.epoch_loss.empty() ? std::string("none") : fixed(r.log.epoch_loss.back()))
      << '\n';
  return out.str();
}

std::string format_confusion_csv(const Metrics& m) {
  std::ostringstream out;
  out << "true\\pred";
  for (std::size_t c = 0; c < m.confusion.size(); ++c) out << ',' << c;
  out << '\n';
  for (std::size_t t = 0; t < m.confusion.size(); ++t) {
    out << t;
    for (std::size_t p = 0; p < m.confusion[t].size(); ++p) out << ',' << m.confusion[t][p];
    out << '\n';
  }
  return out.str();
}

}  // namespace avf
