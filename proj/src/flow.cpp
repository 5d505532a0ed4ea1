#include "lieflow/flow.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace lieflow {

double TimeSchedule::sample(Rng& rng) const {
  double u = rng.uniform();
  if (mode == Mode::Uniform) return u;
  if (!(n >= 1.0)) throw ContractError("TimeSchedule: power skewness must be >= 1");
  // Inverse CDF of the density n t^(n-1) on [0, 1).
  return std::pow(u, 1.0 / n);
}

double sample_time(const TimeSchedule& schedule, Rng& rng) { return schedule.sample(rng); }

const char* to_string(TimeSchedule::Mode m) {
  return m == TimeSchedule::Mode::Uniform ? "uniform" : "power";
}

TimeSchedule::Mode schedule_mode_from_string(const std::string& s) {
  if (s == "uniform") return TimeSchedule::Mode::Uniform;
  if (s == "power") return TimeSchedule::Mode::Power;
  throw ParseError("unknown schedule: " + s);
}

TrainingPair make_training_pair(const PointCloud& x1, const GroupSpec& spec,
                                const TimeSchedule& schedule, Rng& rng) {
  constexpr int kRetries = 16;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    GroupElement g = sample_prior(spec, rng);
    AlgebraElement a;
    try {
      a = mat_log(g.inverse());
    } catch (const CutLocusError&) {
      if (attempt + 1 == kRetries) throw;
      continue;
    }
    TrainingPair pair;
    pair.g = std::move(g);
    pair.x0 = x1.transformed(pair.g);
    if (spec.is_complex() && !pair.x0.is_complex())
      pair.x0.im = Eigen::MatrixXd::Zero(pair.x0.re.rows(), pair.x0.re.cols());
    pair.t = schedule.sample(rng);
    GroupElement step = mat_exp(AlgebraElement::from_coeffs(spec, (pair.t * a.coeffs).eval()));
    pair.x_t = pair.x0.transformed(step);
    pair.target = std::move(a);
    return pair;
  }
  throw CutLocusError("make_training_pair: exhausted retries");  // unreachable
}

namespace {

std::vector<std::int64_t> shuffled_indices(std::int64_t n, Rng rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = n - 1; i > 0; --i)
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
  return idx;
}

template <typename Fn>
void parallel_over(std::int64_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int nt = std::min<std::int64_t>(threads, count);
  for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

TrainResult train_impl(const Dataset& dataset, VelocityNetwork net, AdamState adam,
                       int first_epoch, const TrainConfig& cfg) {
  const GroupSpec spec = net.spec;
  const std::int64_t n = static_cast<std::int64_t>(dataset.samples.size());
  if (n == 0) throw ContractError("train: empty dataset");

  Eigen::VectorXd params;
  net.mlp.to_flat(params);

  TrainResult result;
  result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  const Rng base(cfg.seed);

  for (int epoch = first_epoch; epoch < cfg.epochs; ++epoch) {
    auto order = shuffled_indices(
        n, base.substream(stream::kShuffle).substream(static_cast<std::uint64_t>(epoch)));
    const Rng pair_base =
        base.substream(stream::kTrainPair).substream(static_cast<std::uint64_t>(epoch));
    double epoch_sum = 0.0;
    std::int64_t epoch_rows = 0;
    for (std::int64_t start = 0; start < n; start += cfg.batch) {
      const std::int64_t rows = std::min<std::int64_t>(cfg.batch, n - start);
      Eigen::MatrixXd cloud_rows(rows, net.cloud_input_dim());
      Eigen::VectorXd t(rows);
      Eigen::MatrixXd targets(rows, spec.algebra_dim);
      parallel_over(rows, cfg.threads, [&](std::int64_t slot) {
        Rng rng = pair_base.substream(static_cast<std::uint64_t>(start + slot));
        const PointCloud& x1 = dataset.samples[static_cast<std::size_t>(
            order[static_cast<std::size_t>(start + slot)])];
        TrainingPair pair = make_training_pair(x1, spec, cfg.schedule, rng);
        cloud_rows.row(slot) = net.assemble_cloud_row(pair.x_t).transpose();
        t[slot] = pair.t;
        targets.row(slot) = pair.target.coeffs.transpose();
      });
      LossGrad lg;
      try {
        lg = loss_and_grad_rows(net, cloud_rows, t, targets, cfg.threads);
      } catch (const DivergenceError&) {
        // Keep the parameters of the last completed step.
        result.diverged = true;
        result.net = std::move(net);
        result.opt = std::move(adam);
        result.completed_epochs = epoch;
        return result;
      }
      adam.step(params, lg.grad);
      net.mlp.from_flat(params);
      epoch_sum += lg.loss * static_cast<double>(rows);
      epoch_rows += rows;
    }
    double mean_loss = epoch_sum / static_cast<double>(epoch_rows);
    result.epoch_loss.push_back(mean_loss);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean_loss);
  }
  result.net = std::move(net);
  result.opt = std::move(adam);
  result.completed_epochs = cfg.epochs;
  return result;
}

}  // namespace

TrainResult train(const Dataset& dataset, const GroupSpec& spec, const NetOptions& netopt,
                  const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  VelocityNetwork net =
      VelocityNetwork::create(spec, static_cast<int>(dataset.spec.max_points()),
                              dataset.spec.cloud_dim(), netopt.hidden_width, netopt.embed, rng);
  AdamState adam = AdamState::create(net.mlp.param_count(), AdamConfig{.lr = cfg.lr});
  return train_impl(dataset, std::move(net), std::move(adam), 0, cfg);
}

TrainResult train_continue(const Dataset& dataset, const Checkpoint& ck, const TrainConfig& cfg) {
  if (!ck.opt) throw IncompatibleError("train_continue: checkpoint has no optimizer state");
  return train_impl(dataset, ck.net, *ck.opt, static_cast<int>(ck.epoch), cfg);
}

Trajectory sample_data(const VelocityNetwork& net, const PointCloud& x1,
                       const SamplerConfig& cfg, Rng& rng) {
  if (cfg.steps < 1) throw ContractError("sample_data: steps must be >= 1");
  const GroupSpec& spec = net.spec;
  Trajectory traj;
  traj.initial_transform = sample_prior(spec, rng);
  PointCloud x = x1.transformed(traj.initial_transform);
  if (spec.is_complex() && !x.is_complex())
    x.im = Eigen::MatrixXd::Zero(x.re.rows(), x.re.cols());
  traj.accumulated = GroupElement::identity(spec);
  const double dt = 1.0 / cfg.steps;
  traj.times.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.clouds.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  traj.algebra_outputs.reserve(static_cast<std::size_t>(cfg.steps));
  traj.clouds.push_back(x);
  for (int k = 0; k < cfg.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    traj.times.push_back(t);
    AlgebraElement a = net.forward(x, t);
    if (!a.coeffs.allFinite())
      throw GenerationError("sample_data: non-finite field output at step " + std::to_string(k),
                            k);
    GroupElement step = mat_exp(AlgebraElement::from_coeffs(spec, (dt * a.coeffs).eval()));
    x = x.transformed(step);
    traj.accumulated = step * traj.accumulated;
    traj.clouds.push_back(x);
    traj.algebra_outputs.push_back(std::move(a));
  }
  traj.times.push_back(1.0);
  return traj;
}

GroupElement sample_group_element(const VelocityNetwork& net, const PointCloud& x1,
                                  const SamplerConfig& cfg, Rng& rng) {
  Trajectory traj = sample_data(net, x1, cfg, rng);
  return traj.accumulated * traj.initial_transform;
}

}  // namespace lieflow
