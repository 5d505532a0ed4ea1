#pragma once

#include <string>

#include "lieflow/datasets.hpp"
#include "lieflow/flow.hpp"
#include "lieflow/net.hpp"

namespace lieflow {

enum class Experiment {
  SO2ToC4,
  GL2RToC4,
  GL2CToD4,
  SO3ToTet,
  SO3ToOct,
  SO3ToSO2,
  SO3ToIco,
  MultiObjectTet,
  GaussianSO2,
};

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

/// Full run description. Every field has a documented default fixed by the
/// experiment preset; the dumped snapshot replays the run byte-for-byte.
struct RunConfig {
  Experiment experiment = Experiment::SO2ToC4;
  std::uint64_t seed = 1;
  std::int64_t train_samples = 20000;
  std::int64_t test_samples = 5000;
  int epochs = 200;
  int batch = 256;
  double lr = 1e-3;
  int hidden = 128;
  EmbedMode embed_mode = EmbedMode::Concat;
  int embed_dim = 1;
  double max_frequency = 100.0;
  TimeSchedule::Mode schedule = TimeSchedule::Mode::Uniform;
  double power_n = 5.0;
  int steps = 20;
  int threads = 0;  // 0: all hardware threads
  std::string out_dir;
  bool svg = false;
  double angle_sigma = 0.7853981633974483;  // pi/4
  std::int64_t posterior_samples = 1000;
  double posterior_sigma = 0.1;
  int trajectory_dump = 100;  // trajectories written to trajectories.csv

  /// Preset with all defaults resolved for the experiment.
  static RunConfig preset(Experiment e);

  /// Apply one key=value override; throws ParseError on unknown keys or
  /// malformed values.
  void set(const std::string& key, const std::string& value);

  /// Full key=value dump (the run snapshot).
  std::string dump() const;

  /// Parse a config file of key=value lines ('#' comments) on top of the
  /// preset that the file's "experiment" line selects.
  static RunConfig load(const std::string& path);
  static RunConfig parse_text(const std::string& text, const std::string& origin);

  // Derived quantities.
  GroupSpec group_spec() const;
  ObjectKind object() const;
  TargetKind target() const;
  DatasetSpec dataset_spec(std::int64_t count, std::uint64_t seed_offset) const;
  TimeSchedule time_schedule() const;
  TimeEmbedding time_embedding() const;
  NetOptions net_options() const;
  int resolved_threads() const;
  bool is_2d() const;
};

}  // namespace lieflow
