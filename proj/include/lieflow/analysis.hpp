#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lieflow/flow.hpp"
#include "lieflow/liegroup.hpp"
#include "lieflow/net.hpp"

namespace lieflow {

/// Express a generated transform relative to the known ground-truth frame:
/// h * g_true^-1 (right composition), so that a transform of the form
/// c * g_true recovers c exactly.
GroupElement canonicalize(const GroupElement& h, const GroupElement& g_true);

struct W1Options {
  int max_exact = 2048;        // largest list solved by a single exact assignment
  std::uint64_t seed = 0;      // block-shuffle seed for larger lists
};

struct W1Result {
  double w1 = 0.0;
  double block_variance = 0.0;
  int blocks = 1;
};

/// Wasserstein-1 between the two empirical distributions under the Frobenius
/// ground metric on matrices (complex matrices compared on the interleaved
/// real representation). Equal-size lists up to max_exact are solved by one
/// exact assignment; larger lists average exact assignments over disjoint
/// near-equal blocks of a seeded shuffle.
W1Result wasserstein1(const std::vector<GroupElement>& generated,
                      const std::vector<GroupElement>& truth, const W1Options& opt = {});

/// 1D W1 between equal-size samples: mean absolute difference of the sorted
/// lists (the quantile formula).
double wasserstein1_sorted_1d(std::vector<double> a, std::vector<double> b);

/// Rotation angle of each element after polar projection (elements must be
/// 2x2 real).
std::vector<double> so2_angles(const std::vector<GroupElement>& elements);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::int64_t> counts;
  std::vector<double> centers() const;
};

/// Bin counts over (-pi, pi].
Histogram angle_histogram(const std::vector<double>& angles, int bins);

struct EvalReport {
  std::string experiment;
  double w1 = 0.0;                 // headline metric (see canonicalization field)
  double w1_block_variance = 0.0;
  double w1_raw = 0.0;             // uncanonicalized generated elements
  std::optional<double> w1_angle;  // 1D angle metric where applicable
  std::int64_t sample_count = 0;
  std::vector<std::int64_t> mode_histogram;  // nearest-target-element counts
  std::string canonicalization;    // "right-inverse" | "raw"
  std::string to_kv_text() const;
};

// -- Scalar SO(2) -> C4 diagnostic ------------------------------------------

struct ScalarFlowModel {
  Mlp mlp;  // input (x, t), output velocity
  std::vector<double> modes;

  double velocity(double x, double t) const;
  Eigen::VectorXd velocity_batch(const Eigen::VectorXd& x, double t) const;
};

struct ScalarTrainConfig {
  int steps = 4000;
  int batch = 256;
  int hidden = 128;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Flow matching directly on scalars with the straight-line interpolant
/// x_t = (1-t) x0 + t x1, x0 ~ U[-pi, pi), x1 uniform over the modes.
ScalarFlowModel scalar_flow_train(const std::vector<double>& modes,
                                  const ScalarTrainConfig& cfg);

struct PosteriorGrid {
  std::vector<double> times;               // steps+1 grid values
  std::vector<double> modes;
  double sigma = 0.1;
  Eigen::VectorXd x0;                      // N starting points
  Eigen::MatrixXd positions;               // (T+1) x N simulated x_t
  std::vector<Eigen::MatrixXd> posterior;  // per time: N x K, rows sum to 1
  std::vector<std::vector<std::uint8_t>> flagged;  // per time: non-finite rows
  std::vector<double> mean_entropy;        // over clean rows
  std::vector<std::int64_t> flagged_count;
};

/// Posterior over target modes along simulated trajectories: prior weights at
/// t = 0, a sigma-Gaussian approximation for t > 1 - 1/T, and otherwise
/// inversion of the linear interpolant with the continuity-equation
/// log-density (1D divergence by central differences, step 1e-4).
PosteriorGrid compute_posterior(const ScalarFlowModel& model, int steps, double sigma,
                                int n_samples, std::uint64_t seed, int threads = 1);

// -- Plot-data helpers -------------------------------------------------------

struct Pca2 {
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd components;  // dim x 2, orthonormal columns
  Eigen::MatrixXd projected;   // n x 2
};
/// Two-component PCA of row vectors (exact for inputs of rank <= 2).
Pca2 pca2(const Eigen::MatrixXd& rows);

/// One generated element with its provenance, as written by the sampler.
struct ElementRecord {
  GroupElement h;       // M * g
  GroupElement m;       // accumulated flow transform
  GroupElement g;       // prior draw
  GroupElement g_true;  // dataset ground truth of the seed sample
  std::int64_t sample_index = 0;
};

void save_elements(const std::string& path, const GroupSpec& spec,
                   const std::vector<ElementRecord>& records);
std::pair<GroupSpec, std::vector<ElementRecord>> load_elements(const std::string& path);

void save_scalar_model(const ScalarFlowModel& model, const std::string& path);
ScalarFlowModel load_scalar_model(const std::string& path);

void save_posterior(const PosteriorGrid& grid, const std::string& path);
PosteriorGrid load_posterior(const std::string& path);

struct EmitOptions {
  bool svg = false;
  std::uint64_t jitter_seed = 7;
  double jitter_amplitude = 0.02;  // projected units; display only
};

/// Emits plot CSVs (and optional SVGs) for whatever artifacts are present in
/// the run directory; throws IoError listing the missing inputs if none are.
void emit_plot_data(const std::string& run_dir, const EmitOptions& opt = {});

}  // namespace lieflow
