// avf: command-line front end for the fusion library.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "avf/audio_frontend.hpp"
#include "avf/checkpoint.hpp"
#include "avf/config.hpp"
#include "avf/error.hpp"
#include "avf/experiment.hpp"
#include "avf/feature_io.hpp"
#include "avf/gradcheck_suite.hpp"
#include "avf/model.hpp"
#include "avf/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

avf::ExperimentConfig load(const fs::path& path) {
  avf::ExperimentConfig cfg = avf::load_config(path);
  avf::apply_env_overrides(cfg);
  avf::validate(cfg);
  return cfg;
}

bool is_wav(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".wav";
}

avf::FeatureSet spectrogram_rows(const avf::Spectrogram& s) {
  std::vector<avf::Vec> rows;
  for (std::size_t f = 0; f < s.frames; ++f) {
    avf::Vec row(s.bins);
    for (std::size_t b = 0; b < s.bins; ++b) row[b] = s.at(f, b);
    rows.push_back(std::move(row));
  }
  return avf::FeatureSet(std::move(rows));
}

// One row per frame: static bands, then delta bands, then delta-delta bands.
avf::FeatureSet mel_rows(const avf::MelCube& m) {
  std::vector<avf::Vec> rows;
  for (std::size_t f = 0; f < m.frames; ++f) {
    avf::Vec row(3 * m.bands);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t b = 0; b < m.bands; ++b) row[c * m.bands + b] = m.at(c, b, f);
    }
    rows.push_back(std::move(row));
  }
  return avf::FeatureSet(std::move(rows));
}

// WAV input goes through the speech spectrogram and a patch embedder seeded
// from the config, giving audio.dim channels per patch.
avf::FeatureSet audio_features(const fs::path& path, const avf::ExperimentConfig& cfg) {
  if (!is_wav(path)) return avf::load_features(path);
  const avf::Spectrogram spec = avf::speech_spectrogram(avf::read_wav(path));
  avf::Rng rng = avf::Rng(cfg.seed ^ 0x70a7c4e3b1d2f5ULL);
  const auto params = avf::PatchEmbedParams::for_input(spec.frames, spec.bins, cfg.audio_patch_grid_h,
                                                       cfg.audio_patch_grid_w, cfg.audio_dim, rng);
  return avf::patch_embed(spec, params);
}

void check_dim(const avf::FeatureSet& fs, std::size_t expected, const char* what) {
  if (fs.dim() != expected) {
    throw avf::DimMismatch(std::string(what) + " features have dim " + std::to_string(fs.dim()) +
                           ", model expects " + std::to_string(expected));
  }
}

int cmd_spectrogram(const fs::path& wav, const fs::path& out, bool mel) {
  const avf::AudioClip clip = avf::read_wav(wav);
  const avf::FeatureSet rows = mel ? mel_rows(avf::log_mel_3d(clip)) : spectrogram_rows(avf::speech_spectrogram(clip));
  avf::save_features(out, rows);
  std::printf("wrote %zu x %zu to %s\n", rows.size(), rows.dim(), out.string().c_str());
  return 0;
}

int cmd_fuse(const fs::path& config, const fs::path& audio, const fs::path& visual, const fs::path& out,
             const fs::path& checkpoint) {
  const avf::ExperimentConfig cfg = load(config);
  avf::ExperimentStreams streams(cfg.seed);
  avf::FusionModel model(avf::model_spec(cfg), streams.init);
  if (!checkpoint.empty()) avf::restore_tensors(avf::load_checkpoint(checkpoint), model.tensors());
  const avf::FeatureSet a = audio_features(audio, cfg);
  const avf::FeatureSet v = avf::load_features(visual);
  check_dim(a, model.spec().audio_dim, "audio");
  check_dim(v, model.spec().visual_dim, "visual");
  const avf::Vec fused = model.fuse(a, v);
  avf::save_features(out, avf::FeatureSet({fused}));
  std::printf("wrote fused vector (dim %zu) to %s\n", fused.dim(), out.string().c_str());
  return 0;
}

int cmd_train(const fs::path& config, const fs::path& out_dir, bool train_on_all) {
  avf::ExperimentConfig cfg = load(config);
  if (train_on_all) cfg.train_on_all = true;
  const avf::ExperimentResult r = avf::run_experiment_to_dir(cfg, out_dir);
  std::cout << avf::format_report(cfg, r);
  return 0;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& config) {
  const avf::ExperimentConfig cfg = load(config);
  std::cout << avf::format_metrics(avf::evaluate_checkpoint(cfg, checkpoint));
  return 0;
}

int cmd_gradcheck(const std::string& module, std::size_t instances, std::uint64_t seed) {
  bool ok = true;
  for (const avf::ModuleGradCheck& m : avf::run_gradcheck(module, instances, seed)) {
    const bool pass = m.max_rel_err < avf::kGradCheckTolerance;
    ok = ok && pass;
    std::printf("%-12s instances=%zu entries=%zu max_rel_err=%.3e worst=%s %s\n", m.module.c_str(),
                m.instances, m.entries, m.max_rel_err, m.worst.c_str(), pass ? "PASS" : "FAIL");
  }
  return ok ? 0 : 1;
}

int cmd_synth(const fs::path& config, const fs::path& out_dir) {
  const avf::ExperimentConfig cfg = load(config);
  avf::ExperimentStreams streams(cfg.seed);
  const avf::SyntheticDataset ds = avf::gen_synthetic(cfg, streams.data);
  fs::create_directories(out_dir);
  std::ofstream labels(out_dir / "labels.csv");
  labels << "index,label,audio,visual\n";
  char name[32];
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    std::snprintf(name, sizeof name, "%05zu", i);
    const std::string audio = std::string("audio_") + name + ".avf";
    const std::string visual = std::string("visual_") + name + ".avf";
    avf::save_features(out_dir / audio, ds.samples[i].audio);
    avf::save_features(out_dir / visual, ds.samples[i].visual);
    labels << i << ',' << ds.samples[i].label << ',' << audio << ',' << visual << '\n';
  }
  if (!labels) throw avf::IoError("failed writing " + (out_dir / "labels.csv").string());
  std::printf("wrote %zu samples (%zu classes) to %s\n", ds.samples.size(), ds.classes,
              out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"avf: audio-visual feature fusion toolkit"};
  app.require_subcommand(1);

  fs::path wav, out, config, audio, visual, checkpoint, out_dir;
  bool mel = false, train_on_all = false;
  std::string module = "all";
  std::size_t instances = 10;
  std::uint64_t seed = 2020;

  auto* spec = app.add_subcommand("spectrogram", "WAV -> speech spectrogram (or log-Mel cube) feature file");
  spec->add_option("wav", wav, "16-bit PCM mono WAV")->required();
  spec->add_option("--out", out, "output feature file")->required();
  spec->add_flag("--mel", mel, "write the 3-channel log-Mel cube instead");

  auto* fuse = app.add_subcommand("fuse", "fuse one audio and one visual feature set");
  fuse->add_option("--config", config)->required();
  fuse->add_option("--audio", audio, "feature file or .wav")->required();
  fuse->add_option("--visual", visual, "feature file")->required();
  fuse->add_option("--out", out, "output feature file (one row)")->required();
  fuse->add_option("--checkpoint", checkpoint, "trained weights; default is the seeded init");

  auto* train = app.add_subcommand("train", "train and evaluate on synthetic data");
  train->add_option("--config", config)->required();
  train->add_option("--out-dir", out_dir)->required();
  train->add_flag("--train-on-all", train_on_all, "also train on the held-out split");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the config's held-out split");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--config", config)->required();

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
  grad->add_option("--module", module, "all|self|relation|transformer|fbp|classifier|patch|pipeline");
  grad->add_option("--instances", instances, "random instances per module")->check(CLI::PositiveNumber);
  grad->add_option("--seed", seed);

  auto* synth = app.add_subcommand("synth", "write the synthetic dataset as feature files");
  synth->add_option("--config", config)->required();
  synth->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "avf: error: %s\n", e.what());
    return 2;
  }

  try {
    if (*spec) return cmd_spectrogram(wav, out, mel);
    if (*fuse) return cmd_fuse(config, audio, visual, out, checkpoint);
    if (*train) return cmd_train(config, out_dir, train_on_all);
    if (*eval) return cmd_eval(checkpoint, config);
    if (*grad) return cmd_gradcheck(module, instances, seed);
    if (*synth) return cmd_synth(config, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "avf: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
