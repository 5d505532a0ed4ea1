#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lieflow/datasets.hpp"
#include "lieflow/liegroup.hpp"
#include "lieflow/rng.hpp"
#include "lieflow/tape.hpp"

namespace lieflow {

enum class EmbedMode { Concat, Sinusoidal };
const char* to_string(EmbedMode m);
EmbedMode embed_mode_from_string(const std::string& s);

/// Time input fed to the network: either raw concatenation (dim 1) or a
/// sin/cos embedding with geometrically spaced frequencies in
/// [1, max_frequency].
struct TimeEmbedding {
  EmbedMode mode = EmbedMode::Concat;
  int dim = 1;
  double max_frequency = 100.0;

  void validate() const;
  Eigen::RowVectorXd frequencies() const;  // dim/2 entries (Sinusoidal)
  /// One row per t value: [sin(t*f_1..f_F) | cos(t*f_1..f_F)].
  Eigen::MatrixXd embed(const Eigen::VectorXd& t) const;
};

/// Plain 3-hidden-layer GELU MLP. Weights are stored input-major so the
/// batched forward pass is X*W1 -> ... -> X*W4.
struct Mlp {
  int in_dim = 0, hidden = 0, out_dim = 0;
  Eigen::MatrixXd w1, w2, w3, w4;
  Eigen::RowVectorXd b1, b2, b3, b4;

  void init(int in, int h, int out, Rng& rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  struct TapeGraph {
    Tape::Index x = -1;
    Tape::Index w[4] = {-1, -1, -1, -1};
    Tape::Index b[4] = {-1, -1, -1, -1};
    Tape::Index out = -1;
  };
  /// Continues an existing tape from input node `x`.
  TapeGraph build(Tape& tape, Tape::Index x) const;

  Eigen::Index param_count() const;
  void to_flat(Eigen::VectorXd& out) const;
  void from_flat(const Eigen::VectorXd& flat);
  /// Gathers leaf gradients in the same order as to_flat.
  static void grads_to_flat(const Tape& tape, const TapeGraph& g, Eigen::VectorXd& out);
};

/// The learned field v_t: flattened cloud plus time embedding in, algebra
/// coefficients out.
struct VelocityNetwork {
  GroupSpec spec;
  int n_points = 0;   // network capacity; shorter clouds are zero-padded
  int cloud_dim = 0;  // 2 or 3
  TimeEmbedding embed;
  Mlp mlp;

  int cloud_input_dim() const { return n_points * cloud_dim * (spec.is_complex() ? 2 : 1); }
  int input_dim() const { return cloud_input_dim() + embed.dim; }

  static VelocityNetwork create(const GroupSpec& spec, int n_points, int cloud_dim,
                                int hidden_width, TimeEmbedding embed, Rng& rng);

  /// Flattens clouds (promoting real clouds when the group is complex) into
  /// the cloud block of the network input, one row per cloud.
  Eigen::MatrixXd assemble_cloud_rows(const std::vector<const PointCloud*>& clouds) const;
  Eigen::VectorXd assemble_cloud_row(const PointCloud& cloud) const;

  Eigen::MatrixXd forward_rows(const Eigen::MatrixXd& cloud_rows, const Eigen::VectorXd& t) const;
  AlgebraElement forward(const PointCloud& cloud, double t) const;

  struct TapeGraph {
    Tape::Index cloud = -1;
    Tape::Index t = -1;
    Mlp::TapeGraph mlp;
  };
  TapeGraph build(Tape& tape, Eigen::MatrixXd cloud_rows, const Eigen::VectorXd& t,
                  bool input_grad) const;
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// Mean over the batch of the squared coefficient-space error. Shards of
/// fixed size are reduced in order, so the result does not depend on the
/// thread count. Throws DivergenceError (with the batch index) when the
/// loss is not finite.
LossGrad loss_and_grad_rows(const VelocityNetwork& net, const Eigen::MatrixXd& cloud_rows,
                            const Eigen::VectorXd& t, const Eigen::MatrixXd& targets,
                            int threads);

struct TrainingSample {
  PointCloud x_t;
  double t = 0.0;
  AlgebraElement target;
};
LossGrad loss_and_grad(const VelocityNetwork& net, const std::vector<TrainingSample>& batch,
                       int threads = 1);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  Eigen::VectorXd m, v;
  std::int64_t t = 0;

  static AdamState create(Eigen::Index n, AdamConfig cfg = {});
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
};

struct Checkpoint {
  VelocityNetwork net;
  std::optional<AdamState> opt;
  std::int64_t epoch = 0;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
/// Load and require a matching group spec (IncompatibleError otherwise).
Checkpoint load_checkpoint(const std::string& path, const GroupSpec& expected);

}  // namespace lieflow
