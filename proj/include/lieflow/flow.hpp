#pragma once

#include <functional>
#include <vector>

#include "lieflow/datasets.hpp"
#include "lieflow/net.hpp"

namespace lieflow {

/// Training-time distribution of t on [0, 1): uniform, or the power density
/// n t^(n-1) that concentrates supervision near t = 1.
struct TimeSchedule {
  enum class Mode { Uniform, Power };
  Mode mode = Mode::Uniform;
  double n = 5.0;  // skewness (Power only)

  double sample(Rng& rng) const;
};

const char* to_string(TimeSchedule::Mode m);
TimeSchedule::Mode schedule_mode_from_string(const std::string& s);

double sample_time(const TimeSchedule& schedule, Rng& rng);

struct SamplerConfig {
  int steps = 20;  // inference uses the fixed grid t = k/steps
};

/// One sampled flow: times has steps+1 entries, clouds one per time,
/// algebra_outputs one per step.
struct Trajectory {
  std::vector<double> times;
  std::vector<PointCloud> clouds;
  std::vector<AlgebraElement> algebra_outputs;
  GroupElement accumulated;        // M with clouds.back() = M * clouds.front()
  GroupElement initial_transform;  // the prior draw g

  const PointCloud& final_cloud() const { return clouds.back(); }
};

struct TrainingPair {
  PointCloud x_t;
  double t = 0.0;
  AlgebraElement target;   // constant over t for a fixed (x1, g)
  GroupElement g;          // the prior draw
  PointCloud x0;
};

/// Algorithm: draw g from the prior, set x0 = g x1, A = log(g^-1), sample t,
/// and build x_t = exp(tA) x0. Cut-locus prior draws are resampled up to 16
/// times before the error propagates.
TrainingPair make_training_pair(const PointCloud& x1, const GroupSpec& spec,
                                const TimeSchedule& schedule, Rng& rng);

struct TrainConfig {
  int epochs = 200;
  int batch = 256;
  double lr = 1e-3;
  int threads = 1;
  TimeSchedule schedule;
  std::uint64_t seed = 1;
  /// Called after each epoch with (epoch, mean loss); may be empty.
  std::function<void(int, double)> on_epoch;
};

struct NetOptions {
  int hidden_width = 128;
  TimeEmbedding embed;
};

struct TrainResult {
  VelocityNetwork net;
  AdamState opt;
  std::vector<double> epoch_loss;
  bool diverged = false;
  int completed_epochs = 0;
};

/// Mini-batched conditional flow matching over the dataset. Deterministic
/// given (config.seed, dataset); divergence aborts with the last completed
/// parameters retained.
TrainResult train(const Dataset& dataset, const GroupSpec& spec, const NetOptions& netopt,
                  const TrainConfig& cfg);

/// Resume a previous run: continues epochs [ck.epoch, cfg.epochs) with the
/// checkpointed parameters and optimizer state. Loss curves match an
/// uninterrupted run with the same seed.
TrainResult train_continue(const Dataset& dataset, const Checkpoint& ck, const TrainConfig& cfg);

/// Euler integration on the group: A_t = v(x_t, t), x_{t+dt} = exp(dt A_t) x_t,
/// M accumulated as exp(dt A_t) M.
Trajectory sample_data(const VelocityNetwork& net, const PointCloud& x1,
                       const SamplerConfig& cfg, Rng& rng);

/// Returns h = M g for one sample_data run; h x1 lies (approximately) on the
/// target-group orbit of x1.
GroupElement sample_group_element(const VelocityNetwork& net, const PointCloud& x1,
                                  const SamplerConfig& cfg, Rng& rng);

}  // namespace lieflow
