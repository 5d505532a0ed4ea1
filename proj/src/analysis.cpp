#include "lieflow/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "lieflow/assignment.hpp"
#include "lieflow/runio.hpp"

namespace lieflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

GroupElement canonicalize(const GroupElement& h, const GroupElement& g_true) {
  if (!(h.spec == g_true.spec))
    throw ContractError("canonicalize: elements carry different specs");
  return h * g_true.inverse();
}

// -- Wasserstein-1 -----------------------------------------------------------

namespace {

Eigen::MatrixXd cost_matrix(const std::vector<const GroupElement*>& a,
                            const std::vector<const GroupElement*>& b) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          frobenius_distance(a[i]->mat, b[j]->mat);
  return c;
}

std::vector<std::size_t> shuffled(std::size_t n, Rng rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform_index(static_cast<std::int64_t>(i + 1)))]);
  return idx;
}

}  // namespace

W1Result wasserstein1(const std::vector<GroupElement>& generated,
                      const std::vector<GroupElement>& truth, const W1Options& opt) {
  if (generated.empty() || truth.empty())
    throw ContractError("wasserstein1: empty element list");
  if (!(generated.front().spec == truth.front().spec))
    throw ContractError("wasserstein1: spec mismatch between lists");
  if (generated.size() != truth.size())
    throw ContractError("wasserstein1: lists must have equal size");

  const std::size_t n = generated.size();
  const std::size_t max_exact = static_cast<std::size_t>(opt.max_exact);
  const std::size_t n_blocks = (n + max_exact - 1) / max_exact;

  std::vector<std::size_t> perm_g = shuffled(n, Rng(opt.seed).substream(stream::kEval).substream(1));
  std::vector<std::size_t> perm_t = shuffled(n, Rng(opt.seed).substream(stream::kEval).substream(2));

  W1Result res;
  res.blocks = static_cast<int>(n_blocks);
  std::vector<double> block_w1;
  std::size_t start = 0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    std::size_t size = n / n_blocks + (b < n % n_blocks ? 1 : 0);
    std::vector<const GroupElement*> ga(size), tb(size);
    for (std::size_t i = 0; i < size; ++i) {
      ga[i] = &generated[perm_g[start + i]];
      tb[i] = &truth[perm_t[start + i]];
    }
    start += size;
    double total = linear_assignment_cost(cost_matrix(ga, tb));
    block_w1.push_back(total / static_cast<double>(size));
  }
  double mean = 0.0;
  for (double w : block_w1) mean += w;
  mean /= static_cast<double>(block_w1.size());
  double var = 0.0;
  for (double w : block_w1) var += (w - mean) * (w - mean);
  if (block_w1.size() > 1) var /= static_cast<double>(block_w1.size() - 1);
  res.w1 = mean;
  res.block_variance = var;
  return res;
}

double wasserstein1_sorted_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || a.size() != b.size())
    throw ContractError("wasserstein1_sorted_1d: equal nonempty sizes required");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

std::vector<double> so2_angles(const std::vector<GroupElement>& elements) {
  std::vector<double> out;
  out.reserve(elements.size());
  for (const auto& e : elements) {
    GroupElement r = polar_rotation(e);
    out.push_back(rotation_to_angles(r).yaw);
  }
  return out;
}

Histogram angle_histogram(const std::vector<double>& angles, int bins) {
  if (bins < 1) throw ContractError("angle_histogram: bins must be positive");
  Histogram h;
  h.lo = -kPi;
  h.hi = kPi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (h.hi - h.lo) / bins;
  for (double a : angles) {
    // Fold into (-pi, pi]; -pi maps to the last bin's edge case below.
    double x = std::remainder(a, 2.0 * kPi);
    int b = static_cast<int>(std::floor((x - h.lo) / width));
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::vector<double> Histogram::centers() const {
  std::vector<double> c(counts.size());
  double width = (hi - lo) / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    c[i] = lo + (static_cast<double>(i) + 0.5) * width;
  return c;
}

std::string EvalReport::to_kv_text() const {
  KvBlock kv;
  kv.set("experiment", experiment);
  kv.set_f64("w1", w1);
  kv.set_f64("w1_block_variance", w1_block_variance);
  kv.set_f64("w1_raw", w1_raw);
  if (w1_angle) kv.set_f64("w1_angle", *w1_angle);
  kv.set_i64("sample_count", sample_count);
  kv.set("canonicalization", canonicalization);
  std::string modes;
  for (std::size_t i = 0; i < mode_histogram.size(); ++i) {
    if (i) modes += ' ';
    modes += std::to_string(mode_histogram[i]);
  }
  kv.set("mode_histogram", modes);
  return kv.serialize();
}

// -- Scalar diagnostic -------------------------------------------------------

double ScalarFlowModel::velocity(double x, double t) const {
  Eigen::MatrixXd in(1, 2);
  in << x, t;
  return mlp.forward(in)(0, 0);
}

Eigen::VectorXd ScalarFlowModel::velocity_batch(const Eigen::VectorXd& x, double t) const {
  Eigen::MatrixXd in(x.size(), 2);
  in.col(0) = x;
  in.col(1).setConstant(t);
  return mlp.forward(in).col(0);
}

ScalarFlowModel scalar_flow_train(const std::vector<double>& modes,
                                  const ScalarTrainConfig& cfg) {
  if (modes.empty()) throw ContractError("scalar_flow_train: no modes");
  for (double m : modes)
    if (m < -kPi || m >= kPi) throw ContractError("scalar_flow_train: modes must lie in [-pi, pi)");
  ScalarFlowModel model;
  model.modes = modes;
  Rng init = Rng(cfg.seed).substream(stream::kScalar).substream(stream::kInit);
  model.mlp.init(2, cfg.hidden, 1, init);

  Eigen::VectorXd params;
  model.mlp.to_flat(params);
  AdamState adam = AdamState::create(params.size(), AdamConfig{.lr = cfg.lr});
  const Rng base = Rng(cfg.seed).substream(stream::kScalar);

  for (int step = 0; step < cfg.steps; ++step) {
    Rng rng = base.substream(static_cast<std::uint64_t>(step) + 1000);
    Eigen::MatrixXd x(cfg.batch, 2);
    Eigen::MatrixXd target(cfg.batch, 1);
    for (int i = 0; i < cfg.batch; ++i) {
      double x1 = modes[static_cast<std::size_t>(rng.uniform_index(static_cast<std::int64_t>(modes.size())))];
      double x0 = rng.uniform(-kPi, kPi);
      double t = rng.uniform();
      x(i, 0) = (1.0 - t) * x0 + t * x1;
      x(i, 1) = t;
      target(i, 0) = x1 - x0;
    }
    Tape tape;
    Tape::Index xin = tape.input(std::move(x), false);
    Mlp::TapeGraph g = model.mlp.build(tape, xin);
    Tape::Index diff = tape.sub(g.out, tape.input(std::move(target), false));
    Tape::Index loss = tape.scale(tape.sum_sq(diff), 1.0 / cfg.batch);
    double l = tape.value(loss)(0, 0);
    if (!std::isfinite(l)) throw DivergenceError("scalar_flow_train: non-finite loss", step);
    tape.backward(loss);
    Eigen::VectorXd grad;
    Mlp::grads_to_flat(tape, g, grad);
    adam.step(params, grad);
    model.mlp.from_flat(params);
  }
  return model;
}

PosteriorGrid compute_posterior(const ScalarFlowModel& model, int steps, double sigma,
                                int n_samples, std::uint64_t seed, int threads) {
  if (steps < 2) throw ContractError("compute_posterior: steps must be >= 2");
  if (model.modes.empty()) throw ContractError("compute_posterior: model has no modes");
  const int T = steps;
  const int N = n_samples;
  const int K = static_cast<int>(model.modes.size());
  const double dt = 1.0 / T;
  const double eps = 1e-4;  // central-difference step for the 1D divergence

  PosteriorGrid grid;
  grid.modes = model.modes;
  grid.sigma = sigma;
  grid.times.resize(static_cast<std::size_t>(T) + 1);
  for (int j = 0; j <= T; ++j) grid.times[static_cast<std::size_t>(j)] = static_cast<double>(j) * dt;

  Rng rng = Rng(seed).substream(stream::kPosterior);
  grid.x0.resize(N);
  for (int i = 0; i < N; ++i) grid.x0[i] = rng.uniform(-kPi, kPi);

  // Step + divergence of a batch in one forward pass; x and t are the
  // pre-step state, div accumulates (dv/dx) * dt.
  auto euler_step = [&](Eigen::VectorXd& x, double t, Eigen::VectorXd& div_acc) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd in(3 * n, 2);
    in.col(0).segment(0, n) = x;
    in.col(0).segment(n, n) = x.array() + eps;
    in.col(0).segment(2 * n, n) = x.array() - eps;
    in.col(1).setConstant(t);
    Eigen::VectorXd out = model.mlp.forward(in).col(0);
    div_acc += (out.segment(n, n) - out.segment(2 * n, n)) / (2.0 * eps) * dt;
    x += dt * out.segment(0, n);
  };

  // Main forward simulation.
  grid.positions.resize(T + 1, N);
  {
    Eigen::VectorXd x = grid.x0;
    Eigen::VectorXd dump = Eigen::VectorXd::Zero(N);
    grid.positions.row(0) = x.transpose();
    for (int j = 0; j < T; ++j) {
      euler_step(x, grid.times[static_cast<std::size_t>(j)], dump);
      grid.positions.row(j + 1) = x.transpose();
    }
  }

  grid.posterior.assign(static_cast<std::size_t>(T) + 1, Eigen::MatrixXd::Zero(N, K));
  grid.flagged.assign(static_cast<std::size_t>(T) + 1, std::vector<std::uint8_t>(static_cast<std::size_t>(N), 0));
  grid.mean_entropy.assign(static_cast<std::size_t>(T) + 1, 0.0);
  grid.flagged_count.assign(static_cast<std::size_t>(T) + 1, 0);

  // t = 0: independent of the trajectory; posterior is the mode prior.
  grid.posterior[0].setConstant(1.0 / K);
  grid.mean_entropy[0] = std::log(static_cast<double>(K));

  auto finish_time = [&](int j, const Eigen::MatrixXd& loglik) {
    Eigen::MatrixXd& post = grid.posterior[static_cast<std::size_t>(j)];
    auto& flags = grid.flagged[static_cast<std::size_t>(j)];
    double entropy_sum = 0.0;
    std::int64_t clean = 0;
    for (int i = 0; i < N; ++i) {
      bool nan = false;
      double mx = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        double v = loglik(i, k);
        if (std::isnan(v)) nan = true;
        mx = std::max(mx, v);
      }
      if (nan || !std::isfinite(mx)) {
        flags[static_cast<std::size_t>(i)] = 1;
        post.row(i).setConstant(1.0 / K);
        continue;
      }
      double z = 0.0;
      for (int k = 0; k < K; ++k) z += std::exp(loglik(i, k) - mx);
      double entropy = 0.0;
      for (int k = 0; k < K; ++k) {
        double p = std::exp(loglik(i, k) - mx) / z;
        post(i, k) = p;
        if (p > 0.0) entropy -= p * std::log(p);
      }
      entropy_sum += entropy;
      ++clean;
    }
    std::int64_t flagged = N - clean;
    grid.flagged_count[static_cast<std::size_t>(j)] = flagged;
    grid.mean_entropy[static_cast<std::size_t>(j)] =
        clean > 0 ? entropy_sum / static_cast<double>(clean) : 0.0;
  };

  // Gaussian approximation at the final grid point (t > 1 - 1/T).
  {
    Eigen::MatrixXd loglik(N, K);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < K; ++k) {
        double d = grid.positions(T, i) - model.modes[static_cast<std::size_t>(k)];
        loglik(i, k) = -d * d / (2.0 * sigma * sigma);
      }
    finish_time(T, loglik);
  }

  // Interior times: invert the interpolant per mode and integrate the
  // continuity equation from the inverted start. The uniform prior enters as
  // a constant log-density (see the run notes); the divergence integral is
  // what discriminates between modes.
  std::atomic<int> next{1};
  auto worker = [&] {
    for (;;) {
      int j = next.fetch_add(1);
      if (j >= T) return;
      const double t = grid.times[static_cast<std::size_t>(j)];
      Eigen::MatrixXd loglik(N, K);
      for (int k = 0; k < K; ++k) {
        const double mu = model.modes[static_cast<std::size_t>(k)];
        Eigen::VectorXd x = (grid.positions.row(j).transpose().array() - t * mu) / (1.0 - t);
        Eigen::VectorXd div = Eigen::VectorXd::Zero(N);
        for (int s = 0; s < j; ++s)
          euler_step(x, grid.times[static_cast<std::size_t>(s)], div);
        loglik.col(k) = (-kLog2Pi / 1.0) - div.array();
      }
      finish_time(j, loglik);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return grid;
}

// -- PCA ----------------------------------------------------------------------

Pca2 pca2(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1 || rows.cols() < 2) throw ContractError("pca2: need rows with >= 2 columns");
  Pca2 out;
  out.mean = rows.colwise().mean();
  Eigen::MatrixXd centered = rows.rowwise() - out.mean;
  Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::Index d = rows.cols();
  out.components.resize(d, 2);
  // Eigenvalues come sorted ascending; take the two largest.
  out.components.col(0) = es.eigenvectors().col(d - 1);
  out.components.col(1) = es.eigenvectors().col(d - 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index imax;
    out.components.col(c).cwiseAbs().maxCoeff(&imax);
    if (out.components(imax, c) < 0) out.components.col(c) *= -1.0;  // deterministic sign
  }
  out.projected = centered * out.components;
  return out;
}

// -- Run-artifact IO -----------------------------------------------------------

namespace {

void write_mat(BinaryWriter& w, const Mat& m, bool cplx) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      w.f64(m.re(r, c));
      if (cplx) w.f64(m.is_complex() ? m.im(r, c) : 0.0);
    }
}

Mat read_mat(BinaryReader& r, int dim, bool cplx) {
  Mat m(Eigen::MatrixXd(dim, dim));
  if (cplx) m.im = Eigen::MatrixXd(dim, dim);
  for (int rr = 0; rr < dim; ++rr)
    for (int cc = 0; cc < dim; ++cc) {
      m.re(rr, cc) = r.f64();
      if (cplx) m.im(rr, cc) = r.f64();
    }
  return m;
}

}  // namespace

void save_elements(const std::string& path, const GroupSpec& spec,
                   const std::vector<ElementRecord>& records) {
  BinaryWriter w(path);
  w.magic("LFEL", 1);
  KvBlock kv;
  kv.set("format", "elements");
  kv.set("group", to_string(spec.kind));
  kv.set_i64("count", static_cast<std::int64_t>(records.size()));
  w.text_block(kv.serialize());
  const bool cplx = spec.is_complex();
  for (const auto& rec : records) {
    w.u64(static_cast<std::uint64_t>(rec.sample_index));
    write_mat(w, rec.h.mat, cplx);
    write_mat(w, rec.m.mat, cplx);
    write_mat(w, rec.g.mat, cplx);
    write_mat(w, rec.g_true.mat, cplx);
  }
  w.close();
}

std::pair<GroupSpec, std::vector<ElementRecord>> load_elements(const std::string& path) {
  BinaryReader r(path);
  r.magic("LFEL");
  KvBlock kv = KvBlock::parse(r.text_block());
  GroupSpec spec = GroupSpec::make(group_kind_from_string(kv.get("group")));
  std::int64_t count = kv.get_i64("count");
  std::vector<ElementRecord> recs;
  recs.reserve(static_cast<std::size_t>(count));
  const bool cplx = spec.is_complex();
  for (std::int64_t i = 0; i < count; ++i) {
    r.set_context("element " + std::to_string(i));
    ElementRecord rec;
    rec.sample_index = static_cast<std::int64_t>(r.u64());
    rec.h = GroupElement::unchecked(spec, read_mat(r, spec.matrix_dim, cplx));
    rec.m = GroupElement::unchecked(spec, read_mat(r, spec.matrix_dim, cplx));
    rec.g = GroupElement::unchecked(spec, read_mat(r, spec.matrix_dim, cplx));
    rec.g_true = GroupElement::unchecked(spec, read_mat(r, spec.matrix_dim, cplx));
    recs.push_back(std::move(rec));
  }
  return {spec, std::move(recs)};
}

void save_scalar_model(const ScalarFlowModel& model, const std::string& path) {
  BinaryWriter w(path);
  w.magic("LFSM", 1);
  KvBlock kv;
  kv.set("format", "scalar_model");
  kv.set_i64("hidden", model.mlp.hidden);
  kv.set_i64("modes", static_cast<std::int64_t>(model.modes.size()));
  w.text_block(kv.serialize());
  for (double m : model.modes) w.f64(m);
  Eigen::VectorXd flat;
  model.mlp.to_flat(flat);
  w.u64(static_cast<std::uint64_t>(flat.size()));
  w.f64_block(flat.data(), static_cast<std::size_t>(flat.size()));
  w.close();
}

ScalarFlowModel load_scalar_model(const std::string& path) {
  BinaryReader r(path);
  r.magic("LFSM");
  KvBlock kv = KvBlock::parse(r.text_block());
  ScalarFlowModel model;
  int k = static_cast<int>(kv.get_i64("modes"));
  model.modes.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) model.modes[static_cast<std::size_t>(i)] = r.f64();
  Rng dummy(0);
  model.mlp.init(2, static_cast<int>(kv.get_i64("hidden")), 1, dummy);
  std::uint64_t n = r.u64();
  if (n != static_cast<std::uint64_t>(model.mlp.param_count()))
    throw IncompatibleError("scalar model parameter count mismatch in " + path);
  Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
  r.f64_block(flat.data(), n);
  model.mlp.from_flat(flat);
  return model;
}

void save_posterior(const PosteriorGrid& grid, const std::string& path) {
  BinaryWriter w(path);
  w.magic("LFPG", 1);
  const int T = static_cast<int>(grid.times.size()) - 1;
  const int N = static_cast<int>(grid.x0.size());
  const int K = static_cast<int>(grid.modes.size());
  KvBlock kv;
  kv.set("format", "posterior");
  kv.set_i64("steps", T);
  kv.set_i64("samples", N);
  kv.set_i64("modes", K);
  kv.set_f64("sigma", grid.sigma);
  w.text_block(kv.serialize());
  for (double m : grid.modes) w.f64(m);
  w.f64_block(grid.x0.data(), static_cast<std::size_t>(N));
  w.f64_block(grid.positions.data(), static_cast<std::size_t>(grid.positions.size()));
  for (int j = 0; j <= T; ++j) {
    const auto& p = grid.posterior[static_cast<std::size_t>(j)];
    w.f64_block(p.data(), static_cast<std::size_t>(p.size()));
    for (int i = 0; i < N; ++i) w.u8(grid.flagged[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j <= T; ++j) w.f64(grid.mean_entropy[static_cast<std::size_t>(j)]);
  for (int j = 0; j <= T; ++j) w.u64(static_cast<std::uint64_t>(grid.flagged_count[static_cast<std::size_t>(j)]));
  w.close();
}

PosteriorGrid load_posterior(const std::string& path) {
  BinaryReader r(path);
  r.magic("LFPG");
  KvBlock kv = KvBlock::parse(r.text_block());
  const int T = static_cast<int>(kv.get_i64("steps"));
  const int N = static_cast<int>(kv.get_i64("samples"));
  const int K = static_cast<int>(kv.get_i64("modes"));
  PosteriorGrid grid;
  grid.sigma = kv.get_f64("sigma");
  grid.times.resize(static_cast<std::size_t>(T) + 1);
  for (int j = 0; j <= T; ++j) grid.times[static_cast<std::size_t>(j)] = static_cast<double>(j) / T;
  grid.modes.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) grid.modes[static_cast<std::size_t>(k)] = r.f64();
  grid.x0.resize(N);
  r.f64_block(grid.x0.data(), static_cast<std::size_t>(N));
  grid.positions.resize(T + 1, N);
  r.f64_block(grid.positions.data(), static_cast<std::size_t>(grid.positions.size()));
  grid.posterior.assign(static_cast<std::size_t>(T) + 1, Eigen::MatrixXd(N, K));
  grid.flagged.assign(static_cast<std::size_t>(T) + 1, std::vector<std::uint8_t>(static_cast<std::size_t>(N)));
  for (int j = 0; j <= T; ++j) {
    r.f64_block(grid.posterior[static_cast<std::size_t>(j)].data(),
                static_cast<std::size_t>(N) * static_cast<std::size_t>(K));
    for (int i = 0; i < N; ++i)
      grid.flagged[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = r.u8();
  }
  grid.mean_entropy.resize(static_cast<std::size_t>(T) + 1);
  grid.flagged_count.resize(static_cast<std::size_t>(T) + 1);
  for (int j = 0; j <= T; ++j) grid.mean_entropy[static_cast<std::size_t>(j)] = r.f64();
  for (int j = 0; j <= T; ++j)
    grid.flagged_count[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(r.u64());
  return grid;
}

// -- Plot emission -------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

struct SvgPlot {
  std::ostringstream body;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  static constexpr int kW = 640, kH = 480, kMargin = 40;

  double px(double x) const {
    return kMargin + (x - xmin) / (xmax - xmin + 1e-300) * (kW - 2 * kMargin);
  }
  double py(double y) const {
    return kH - kMargin - (y - ymin) / (ymax - ymin + 1e-300) * (kH - 2 * kMargin);
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r << "\" fill=\""
         << fill << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body << "<polyline fill=\"none\" stroke=\"" << stroke << "\" points=\"";
    for (auto& [x, y] : pts) body << px(x) << ',' << py(y) << ' ';
    body << "\"/>\n";
  }
  void save(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
  }
};

std::string heat_color(double v) {
  int r = static_cast<int>(255 * std::clamp(v, 0.0, 1.0));
  int b = 255 - r;
  return "rgb(" + std::to_string(r) + ",64," + std::to_string(b) + ")";
}

/// Minimal reader for the CSVs this project writes (no quoting).
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty csv: " + path);
  std::vector<std::string> header;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) header.push_back(cell);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size())
      throw ParseError("csv row width mismatch in " + path + " at data row " +
                       std::to_string(rows.size()));
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

void emit_elements_plots(const std::string& run_dir, const EmitOptions& opt,
                         const std::string& plots) {
  auto [spec, recs] = load_elements(run_dir + "/elements.bin");
  std::vector<GroupElement> canonical;
  canonical.reserve(recs.size());
  for (const auto& rec : recs) canonical.push_back(canonicalize(rec.h, rec.g_true));

  if (spec.matrix_dim == 2 && !spec.is_complex()) {
    std::vector<double> angles = so2_angles(canonical);
    CsvWriter aw(plots + "/angles.csv", {"index", "angle"});
    for (std::size_t i = 0; i < angles.size(); ++i)
      aw.row({static_cast<double>(i), angles[i]});
    aw.close();
    Histogram h = angle_histogram(angles, 72);
    CsvWriter hw(plots + "/angle_hist.csv", {"bin_center", "count"});
    auto centers = h.centers();
    for (std::size_t i = 0; i < centers.size(); ++i)
      hw.row({centers[i], static_cast<double>(h.counts[i])});
    hw.close();
    if (opt.svg) {
      SvgPlot p;
      p.xmin = -kPi;
      p.xmax = kPi;
      p.ymin = 0;
      double maxc = 1;
      for (auto c : h.counts) maxc = std::max(maxc, static_cast<double>(c));
      p.ymax = maxc;
      for (std::size_t i = 0; i < centers.size(); ++i)
        p.polyline({{centers[i], 0.0}, {centers[i], static_cast<double>(h.counts[i])}}, "steelblue");
      p.save(plots + "/angle_hist.svg");
    }
  } else if (spec.matrix_dim == 2) {
    // Complex 2x2: emit the canonicalized matrices on the interleaved
    // representation for external clustering/plotting.
    CsvWriter cw(plots + "/elements_canonical.csv",
                 {"index", "re00", "im00", "re01", "im01", "re10", "im10", "re11", "im11"});
    for (std::size_t i = 0; i < canonical.size(); ++i) {
      const Mat m = canonical[i].mat.as_complex();
      cw.row({static_cast<double>(i), m.re(0, 0), m.im(0, 0), m.re(0, 1), m.im(0, 1),
              m.re(1, 0), m.im(1, 0), m.re(1, 1), m.im(1, 1)});
    }
    cw.close();
  } else {
    // 3D: Euler angles on the Mollweide plane, jittered for display.
    Rng jrng = Rng(opt.jitter_seed).substream(stream::kJitter);
    CsvWriter mw(plots + "/mollweide.csv",
                 {"u", "v", "u_jittered", "v_jittered", "roll", "is_truth"});
    auto emit_rows = [&](const std::vector<GroupElement>& elems, double truth_flag) {
      for (const auto& e : elems) {
        EulerAngles ang = rotation_to_angles(polar_rotation(e));
        auto [u, v] = mollweide_project(ang.yaw, ang.pitch);
        double ju = u + jrng.uniform(-opt.jitter_amplitude, opt.jitter_amplitude);
        double jv = v + jrng.uniform(-opt.jitter_amplitude, opt.jitter_amplitude);
        mw.row({u, v, ju, jv, ang.roll, truth_flag});
      }
    };
    emit_rows(canonical, 0.0);
    mw.close();
    if (opt.svg) {
      SvgPlot p;
      p.xmin = -2.9;
      p.xmax = 2.9;
      p.ymin = -1.5;
      p.ymax = 1.5;
      for (const auto& e : canonical) {
        EulerAngles ang = rotation_to_angles(polar_rotation(e));
        auto [u, v] = mollweide_project(ang.yaw, ang.pitch);
        p.circle(u + jrng.uniform(-opt.jitter_amplitude, opt.jitter_amplitude),
                 v + jrng.uniform(-opt.jitter_amplitude, opt.jitter_amplitude), 1.6,
                 heat_color((ang.roll + kPi) / (2 * kPi)));
      }
      p.save(plots + "/mollweide.svg");
    }
  }
}

void emit_trajectory_plots(const std::string& run_dir, const EmitOptions& opt,
                           const std::string& plots) {
  auto [header, rows] = read_csv(run_dir + "/trajectories.csv");
  // Locate centroid columns (c0, c1, ...).
  std::vector<int> ccols;
  int traj_col = -1, step_col = -1, t_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "traj") traj_col = static_cast<int>(i);
    if (header[i] == "step") step_col = static_cast<int>(i);
    if (header[i] == "t") t_col = static_cast<int>(i);
    if (!header[i].empty() && header[i][0] == 'c' && header[i].size() <= 3 &&
        std::isdigit(static_cast<unsigned char>(header[i][1])))
      ccols.push_back(static_cast<int>(i));
  }
  if (traj_col < 0 || t_col < 0 || ccols.empty())
    throw ParseError("trajectories.csv: missing traj/t/centroid columns");
  Eigen::MatrixXd cent(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ccols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < ccols.size(); ++c)
      cent(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][static_cast<std::size_t>(ccols[static_cast<std::size_t>(c)])];

  if (ccols.size() >= 3) {
    Pca2 p = pca2(cent);
    CsvWriter pw(plots + "/centroid_pca.csv", {"traj", "step", "t", "pc1", "pc2"});
    for (std::size_t r = 0; r < rows.size(); ++r)
      pw.row({rows[r][static_cast<std::size_t>(traj_col)],
              step_col >= 0 ? rows[r][static_cast<std::size_t>(step_col)] : 0.0,
              rows[r][static_cast<std::size_t>(t_col)], p.projected(static_cast<Eigen::Index>(r), 0),
              p.projected(static_cast<Eigen::Index>(r), 1)});
    pw.close();
    if (opt.svg) {
      SvgPlot sp;
      sp.xmin = p.projected.col(0).minCoeff() - 0.1;
      sp.xmax = p.projected.col(0).maxCoeff() + 0.1;
      sp.ymin = p.projected.col(1).minCoeff() - 0.1;
      sp.ymax = p.projected.col(1).maxCoeff() + 0.1;
      for (Eigen::Index r = 0; r < p.projected.rows(); ++r)
        sp.circle(p.projected(r, 0), p.projected(r, 1), 1.2,
                  heat_color(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(t_col)]));
      sp.save(plots + "/centroid_pca.svg");
    }
  } else {
    CsvWriter cw(plots + "/centroids.csv", {"traj", "step", "t", "cx", "cy"});
    for (std::size_t r = 0; r < rows.size(); ++r)
      cw.row({rows[r][static_cast<std::size_t>(traj_col)],
              step_col >= 0 ? rows[r][static_cast<std::size_t>(step_col)] : 0.0,
              rows[r][static_cast<std::size_t>(t_col)], cent(static_cast<Eigen::Index>(r), 0),
              cent(static_cast<Eigen::Index>(r), 1)});
    cw.close();
  }
}

void emit_scalar_plots(const std::string& run_dir, const EmitOptions& opt,
                       const std::string& plots) {
  PosteriorGrid grid = load_posterior(run_dir + "/posterior.bin");
  const int T = static_cast<int>(grid.times.size()) - 1;
  const int N = static_cast<int>(grid.x0.size());
  const int K = static_cast<int>(grid.modes.size());

  CsvWriter ew(plots + "/entropy.csv", {"t", "mean_entropy", "flagged"});
  for (int j = 0; j <= T; ++j)
    ew.row({grid.times[static_cast<std::size_t>(j)], grid.mean_entropy[static_cast<std::size_t>(j)],
            static_cast<double>(grid.flagged_count[static_cast<std::size_t>(j)])});
  ew.close();

  // Mean posterior per time, with samples grouped by the mode nearest x0.
  std::vector<int> cls(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (std::abs(grid.x0[i] - grid.modes[static_cast<std::size_t>(k)]) <
          std::abs(grid.x0[i] - grid.modes[static_cast<std::size_t>(best)]))
        best = k;
    cls[static_cast<std::size_t>(i)] = best;
  }
  std::vector<std::string> header = {"t", "class"};
  for (int k = 0; k < K; ++k) header.push_back("p_mode" + std::to_string(k));
  CsvWriter pw(plots + "/posterior_classes.csv", header);
  for (int j = 0; j <= T; ++j)
    for (int c = 0; c < K; ++c) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(K);
      int count = 0;
      for (int i = 0; i < N; ++i) {
        if (cls[static_cast<std::size_t>(i)] != c ||
            grid.flagged[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
          continue;
        mean += grid.posterior[static_cast<std::size_t>(j)].row(i).transpose();
        ++count;
      }
      if (count > 0) mean /= static_cast<double>(count);
      std::vector<double> row = {grid.times[static_cast<std::size_t>(j)], static_cast<double>(c)};
      for (int k = 0; k < K; ++k) row.push_back(mean[k]);
      pw.row(row);
    }
  pw.close();

  if (fs::exists(run_dir + "/scalar_model.bin")) {
    ScalarFlowModel model = load_scalar_model(run_dir + "/scalar_model.bin");
    CsvWriter vw(plots + "/velocity_grid.csv", {"x", "t", "v"});
    const int nx = 41, nt = 11;
    for (int it = 0; it < nt; ++it) {
      double t = static_cast<double>(it) / (nt - 1);
      Eigen::VectorXd xs(nx);
      for (int ix = 0; ix < nx; ++ix) xs[ix] = -kPi + 2 * kPi * ix / (nx - 1);
      Eigen::VectorXd v = model.velocity_batch(xs, t);
      for (int ix = 0; ix < nx; ++ix) vw.row({xs[ix], t, v[ix]});
    }
    vw.close();
  }

  if (opt.svg) {
    SvgPlot p;
    p.xmin = 0;
    p.xmax = 1;
    p.ymin = 0;
    p.ymax = std::log(static_cast<double>(K)) * 1.05;
    std::vector<std::pair<double, double>> pts;
    for (int j = 0; j <= T; ++j)
      pts.emplace_back(grid.times[static_cast<std::size_t>(j)],
                       grid.mean_entropy[static_cast<std::size_t>(j)]);
    p.polyline(pts, "firebrick");
    p.save(plots + "/entropy.svg");
  }
}

}  // namespace

void emit_plot_data(const std::string& run_dir, const EmitOptions& opt) {
  const std::string plots = run_dir + "/plots";
  std::vector<std::string> missing;
  bool any = false;
  std::error_code ec;
  fs::create_directories(plots, ec);
  if (ec) throw IoError("cannot create " + plots);

  if (fs::exists(run_dir + "/elements.bin")) {
    emit_elements_plots(run_dir, opt, plots);
    any = true;
  } else {
    missing.push_back("elements.bin");
  }
  if (fs::exists(run_dir + "/trajectories.csv")) {
    emit_trajectory_plots(run_dir, opt, plots);
    any = true;
  } else {
    missing.push_back("trajectories.csv");
  }
  if (fs::exists(run_dir + "/posterior.bin")) {
    emit_scalar_plots(run_dir, opt, plots);
    any = true;
  } else {
    missing.push_back("posterior.bin");
  }
  if (!any) {
    std::string msg = "emit_plot_data: no inputs found in " + run_dir + "; expected one of:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
}

}  // namespace lieflow
