#include "lieflow/net.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "lieflow/runio.hpp"

namespace lieflow {

const char* to_string(EmbedMode m) {
  return m == EmbedMode::Concat ? "concat" : "sinusoidal";
}

EmbedMode embed_mode_from_string(const std::string& s) {
  if (s == "concat") return EmbedMode::Concat;
  if (s == "sinusoidal") return EmbedMode::Sinusoidal;
  throw ParseError("unknown embedding mode: " + s);
}

void TimeEmbedding::validate() const {
  if (mode == EmbedMode::Concat) {
    if (dim != 1) throw ContractError("TimeEmbedding: concat mode has dim 1");
  } else {
    if (dim < 2 || dim % 2 != 0)
      throw ContractError("TimeEmbedding: sinusoidal dim must be even and >= 2");
    if (!(max_frequency >= 1.0)) throw ContractError("TimeEmbedding: max_frequency must be >= 1");
  }
}

Eigen::RowVectorXd TimeEmbedding::frequencies() const {
  const int f = dim / 2;
  Eigen::RowVectorXd w(f);
  for (int k = 0; k < f; ++k)
    w[k] = (f == 1) ? 1.0 : std::pow(max_frequency, static_cast<double>(k) / (f - 1));
  return w;
}

Eigen::MatrixXd TimeEmbedding::embed(const Eigen::VectorXd& t) const {
  if (mode == EmbedMode::Concat) return t;
  Eigen::RowVectorXd w = frequencies();
  Eigen::MatrixXd phases = t * w;  // B x F outer product
  Eigen::MatrixXd out(t.size(), dim);
  out << phases.array().sin().matrix(), phases.array().cos().matrix();
  return out;
}

void Mlp::init(int in, int h, int out, Rng& rng) {
  in_dim = in;
  hidden = h;
  out_dim = out;
  auto kaiming = [&rng](Eigen::MatrixXd& w, int fan_in) {
    double bound = std::sqrt(6.0 / fan_in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
  };
  w1.resize(in, h);
  w2.resize(h, h);
  w3.resize(h, h);
  kaiming(w1, in);
  kaiming(w2, h);
  kaiming(w3, h);
  b1 = Eigen::RowVectorXd::Zero(h);
  b2 = Eigen::RowVectorXd::Zero(h);
  b3 = Eigen::RowVectorXd::Zero(h);
  // Zero head: the initial field is identically zero.
  w4 = Eigen::MatrixXd::Zero(h, out);
  b4 = Eigen::RowVectorXd::Zero(out);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.cols() != in_dim) throw ContractError("Mlp::forward: input width mismatch");
  auto act = [](Eigen::MatrixXd m) {
    return m.unaryExpr([](double v) { return gelu_scalar(v); }).eval();
  };
  Eigen::MatrixXd h1 = act(((x * w1).rowwise() + b1).eval());
  Eigen::MatrixXd h2 = act(((h1 * w2).rowwise() + b2).eval());
  Eigen::MatrixXd h3 = act(((h2 * w3).rowwise() + b3).eval());
  return (h3 * w4).rowwise() + b4;
}

Mlp::TapeGraph Mlp::build(Tape& tape, Tape::Index x) const {
  TapeGraph g;
  g.x = x;
  const Eigen::MatrixXd* ws[4] = {&w1, &w2, &w3, &w4};
  const Eigen::RowVectorXd* bs[4] = {&b1, &b2, &b3, &b4};
  Tape::Index cur = x;
  for (int layer = 0; layer < 4; ++layer) {
    g.w[layer] = tape.input(*ws[layer], true);
    g.b[layer] = tape.input(*bs[layer], true);
    cur = tape.add_rowvec(tape.matmul(cur, g.w[layer]), g.b[layer]);
    if (layer < 3) cur = tape.gelu(cur);
  }
  g.out = cur;
  return g;
}

Eigen::Index Mlp::param_count() const {
  return w1.size() + w2.size() + w3.size() + w4.size() + b1.size() + b2.size() + b3.size() +
         b4.size();
}

namespace {
template <typename Fn>
void for_each_block(const Mlp& m, Fn&& fn) {
  fn(m.w1);
  fn(m.b1);
  fn(m.w2);
  fn(m.b2);
  fn(m.w3);
  fn(m.b3);
  fn(m.w4);
  fn(m.b4);
}
}  // namespace

void Mlp::to_flat(Eigen::VectorXd& out) const {
  out.resize(param_count());
  Eigen::Index pos = 0;
  for_each_block(*this, [&](const auto& block) {
    out.segment(pos, block.size()) = Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
    pos += block.size();
  });
}

void Mlp::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count()) throw ContractError("Mlp::from_flat: size mismatch");
  Eigen::Index pos = 0;
  auto take = [&](auto& block) {
    Eigen::Map<Eigen::VectorXd>(block.data(), block.size()) = flat.segment(pos, block.size());
    pos += block.size();
  };
  take(w1);
  take(b1);
  take(w2);
  take(b2);
  take(w3);
  take(b3);
  take(w4);
  take(b4);
}

void Mlp::grads_to_flat(const Tape& tape, const TapeGraph& g, Eigen::VectorXd& out) {
  Eigen::Index total = 0;
  for (int l = 0; l < 4; ++l)
    total += tape.value(g.w[l]).size() + tape.value(g.b[l]).size();
  out.resize(total);
  Eigen::Index pos = 0;
  for (int l = 0; l < 4; ++l) {
    const Eigen::MatrixXd& gw = tape.gradient(g.w[l]);
    const Eigen::MatrixXd& gb = tape.gradient(g.b[l]);
    out.segment(pos, gw.size()) = Eigen::Map<const Eigen::VectorXd>(gw.data(), gw.size());
    pos += gw.size();
    out.segment(pos, gb.size()) = Eigen::Map<const Eigen::VectorXd>(gb.data(), gb.size());
    pos += gb.size();
  }
}

VelocityNetwork VelocityNetwork::create(const GroupSpec& spec, int n_points, int cloud_dim,
                                        int hidden_width, TimeEmbedding embed, Rng& rng) {
  embed.validate();
  VelocityNetwork net;
  net.spec = spec;
  net.n_points = n_points;
  net.cloud_dim = cloud_dim;
  net.embed = embed;
  Rng init_rng = rng.substream(stream::kInit);
  net.mlp.init(net.input_dim(), hidden_width, spec.algebra_dim, init_rng);
  return net;
}

Eigen::VectorXd VelocityNetwork::assemble_cloud_row(const PointCloud& cloud) const {
  if (cloud.dim != cloud_dim) throw ContractError("velocity net: cloud dimension mismatch");
  if (cloud.point_count() > n_points)
    throw ContractError("velocity net: cloud has more points than network capacity");
  if (spec.is_complex() && !cloud.is_complex()) {
    PointCloud c = cloud;
    c.im = Eigen::MatrixXd::Zero(c.re.rows(), c.re.cols());
    return c.flatten(n_points);
  }
  if (!spec.is_complex() && cloud.is_complex())
    throw ContractError("velocity net: complex cloud fed to a real network");
  return cloud.flatten(n_points);
}

Eigen::MatrixXd VelocityNetwork::assemble_cloud_rows(
    const std::vector<const PointCloud*>& clouds) const {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(clouds.size()), cloud_input_dim());
  for (std::size_t i = 0; i < clouds.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = assemble_cloud_row(*clouds[i]).transpose();
  return rows;
}

Eigen::MatrixXd VelocityNetwork::forward_rows(const Eigen::MatrixXd& cloud_rows,
                                              const Eigen::VectorXd& t) const {
  if (cloud_rows.rows() != t.size())
    throw ContractError("velocity net: batch size mismatch between clouds and times");
  Eigen::MatrixXd x(cloud_rows.rows(), input_dim());
  x << cloud_rows, embed.embed(t);
  return mlp.forward(x);
}

AlgebraElement VelocityNetwork::forward(const PointCloud& cloud, double t) const {
  Eigen::MatrixXd rows = assemble_cloud_row(cloud).transpose();
  Eigen::VectorXd tv = Eigen::VectorXd::Constant(1, t);
  Eigen::MatrixXd out = forward_rows(rows, tv);
  return AlgebraElement::from_coeffs(spec, out.row(0).transpose());
}

VelocityNetwork::TapeGraph VelocityNetwork::build(Tape& tape, Eigen::MatrixXd cloud_rows,
                                                  const Eigen::VectorXd& t,
                                                  bool input_grad) const {
  TapeGraph g;
  g.cloud = tape.input(std::move(cloud_rows), input_grad);
  g.t = tape.input(t, input_grad);
  Tape::Index emb;
  if (embed.mode == EmbedMode::Concat) {
    emb = g.t;
  } else {
    Tape::Index freqs = tape.input(embed.frequencies(), false);
    Tape::Index phases = tape.matmul(g.t, freqs);
    emb = tape.concat_cols(tape.sin(phases), tape.cos(phases));
  }
  Tape::Index x = tape.concat_cols(g.cloud, emb);
  g.mlp = mlp.build(tape, x);
  return g;
}

namespace {

struct ShardResult {
  double sum_sq = 0.0;
  Eigen::VectorXd grad;
  int nonfinite_row = -1;
};

ShardResult run_shard(const VelocityNetwork& net, const Eigen::MatrixXd& cloud_rows,
                      const Eigen::VectorXd& t, const Eigen::MatrixXd& targets,
                      Eigen::Index row0, Eigen::Index rows, double inv_batch) {
  Tape tape;
  auto g = net.build(tape, cloud_rows.middleRows(row0, rows), t.segment(row0, rows), false);
  Tape::Index target_leaf = tape.input(targets.middleRows(row0, rows), false);
  Tape::Index diff = tape.sub(g.mlp.out, target_leaf);
  Tape::Index loss = tape.scale(tape.sum_sq(diff), inv_batch);
  ShardResult res;
  res.sum_sq = tape.value(loss)(0, 0);
  if (!std::isfinite(res.sum_sq)) {
    const Eigen::MatrixXd& d = tape.value(diff);
    for (Eigen::Index r = 0; r < d.rows(); ++r)
      if (!d.row(r).allFinite()) {
        res.nonfinite_row = static_cast<int>(row0 + r);
        break;
      }
    if (res.nonfinite_row < 0) res.nonfinite_row = static_cast<int>(row0);
    return res;
  }
  tape.backward(loss);
  Mlp::grads_to_flat(tape, g.mlp, res.grad);
  return res;
}

}  // namespace

LossGrad loss_and_grad_rows(const VelocityNetwork& net, const Eigen::MatrixXd& cloud_rows,
                            const Eigen::VectorXd& t, const Eigen::MatrixXd& targets,
                            int threads) {
  const Eigen::Index batch = cloud_rows.rows();
  if (batch == 0) throw ContractError("loss_and_grad: empty batch");
  if (targets.rows() != batch || t.size() != batch)
    throw ContractError("loss_and_grad: batch size mismatch");
  // Fixed shard size keeps the reduction order (and hence bits) independent
  // of the thread count.
  constexpr Eigen::Index kShardRows = 64;
  const Eigen::Index n_shards = (batch + kShardRows - 1) / kShardRows;
  const double inv_batch = 1.0 / static_cast<double>(batch);

  std::vector<ShardResult> results(static_cast<std::size_t>(n_shards));
  auto work = [&](Eigen::Index s) {
    Eigen::Index row0 = s * kShardRows;
    Eigen::Index rows = std::min(kShardRows, batch - row0);
    results[static_cast<std::size_t>(s)] =
        run_shard(net, cloud_rows, t, targets, row0, rows, inv_batch);
  };
  if (threads <= 1 || n_shards == 1) {
    for (Eigen::Index s = 0; s < n_shards; ++s) work(s);
  } else {
    std::atomic<Eigen::Index> next{0};
    auto worker = [&] {
      for (;;) {
        Eigen::Index s = next.fetch_add(1);
        if (s >= n_shards) return;
        work(s);
      }
    };
    std::vector<std::thread> pool;
    int nt = std::min<int>(threads, static_cast<int>(n_shards));
    pool.reserve(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(net.mlp.param_count());
  for (Eigen::Index s = 0; s < n_shards; ++s) {
    const ShardResult& r = results[static_cast<std::size_t>(s)];
    if (r.nonfinite_row >= 0)
      throw DivergenceError("non-finite loss at batch index " + std::to_string(r.nonfinite_row),
                            r.nonfinite_row);
    out.loss += r.sum_sq;
    out.grad += r.grad;
  }
  if (!std::isfinite(out.loss))
    throw DivergenceError("non-finite loss after reduction", 0);
  return out;
}

LossGrad loss_and_grad(const VelocityNetwork& net, const std::vector<TrainingSample>& batch,
                       int threads) {
  if (batch.empty()) throw ContractError("loss_and_grad: empty batch");
  std::vector<const PointCloud*> clouds;
  clouds.reserve(batch.size());
  Eigen::VectorXd t(static_cast<Eigen::Index>(batch.size()));
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(batch.size()), net.spec.algebra_dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    clouds.push_back(&batch[i].x_t);
    t[static_cast<Eigen::Index>(i)] = batch[i].t;
    targets.row(static_cast<Eigen::Index>(i)) = batch[i].target.coeffs.transpose();
  }
  return loss_and_grad_rows(net, net.assemble_cloud_rows(clouds), t, targets, threads);
}

AdamState AdamState::create(Eigen::Index n, AdamConfig cfg) {
  AdamState s;
  s.cfg = cfg;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void AdamState::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw ContractError("AdamState::step: size mismatch");
  ++t;
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  params -= (cfg.lr * (m / c1).array() / ((v / c2).array().sqrt() + cfg.eps)).matrix();
}

namespace {
const std::vector<std::string> kCheckpointKeys = {
    "format", "group", "n_points", "cloud_dim", "hidden",
    "embed_mode", "embed_dim", "max_frequency", "algebra_dim", "epoch"};
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  BinaryWriter w(path);
  w.magic("LFCK", 1);
  KvBlock kv;
  kv.set("format", "checkpoint");
  kv.set("group", to_string(ck.net.spec.kind));
  kv.set_i64("n_points", ck.net.n_points);
  kv.set_i64("cloud_dim", ck.net.cloud_dim);
  kv.set_i64("hidden", ck.net.mlp.hidden);
  kv.set("embed_mode", to_string(ck.net.embed.mode));
  kv.set_i64("embed_dim", ck.net.embed.dim);
  kv.set_f64("max_frequency", ck.net.embed.max_frequency);
  kv.set_i64("algebra_dim", ck.net.spec.algebra_dim);
  kv.set_i64("epoch", ck.epoch);
  w.text_block(kv.serialize());
  Eigen::VectorXd flat;
  ck.net.mlp.to_flat(flat);
  w.u64(static_cast<std::uint64_t>(flat.size()));
  w.f64_block(flat.data(), static_cast<std::size_t>(flat.size()));
  w.u8(ck.opt.has_value() ? 1 : 0);
  if (ck.opt) {
    w.u64(static_cast<std::uint64_t>(ck.opt->t));
    w.f64(ck.opt->cfg.lr);
    w.f64(ck.opt->cfg.beta1);
    w.f64(ck.opt->cfg.beta2);
    w.f64(ck.opt->cfg.eps);
    w.f64_block(ck.opt->m.data(), static_cast<std::size_t>(ck.opt->m.size()));
    w.f64_block(ck.opt->v.data(), static_cast<std::size_t>(ck.opt->v.size()));
  }
  w.close();
}

Checkpoint load_checkpoint(const std::string& path) {
  BinaryReader r(path);
  r.magic("LFCK");
  KvBlock kv = KvBlock::parse(r.text_block());
  Checkpoint ck;
  GroupSpec spec = GroupSpec::make(group_kind_from_string(kv.get("group")));
  if (kv.get_i64("algebra_dim") != spec.algebra_dim)
    throw IncompatibleError("checkpoint algebra_dim does not match group " + kv.get("group"));
  ck.net.spec = spec;
  ck.net.n_points = static_cast<int>(kv.get_i64("n_points"));
  ck.net.cloud_dim = static_cast<int>(kv.get_i64("cloud_dim"));
  ck.net.embed.mode = embed_mode_from_string(kv.get("embed_mode"));
  ck.net.embed.dim = static_cast<int>(kv.get_i64("embed_dim"));
  ck.net.embed.max_frequency = kv.get_f64("max_frequency");
  ck.epoch = kv.get_i64("epoch");
  int hidden = static_cast<int>(kv.get_i64("hidden"));
  Rng dummy(0);
  ck.net.mlp.init(ck.net.input_dim(), hidden, spec.algebra_dim, dummy);
  std::uint64_t n = r.u64();
  if (n != static_cast<std::uint64_t>(ck.net.mlp.param_count()))
    throw IncompatibleError("checkpoint parameter count does not match architecture header");
  Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
  r.f64_block(flat.data(), n);
  ck.net.mlp.from_flat(flat);
  if (r.u8() != 0) {
    AdamState st = AdamState::create(static_cast<Eigen::Index>(n));
    st.t = static_cast<std::int64_t>(r.u64());
    st.cfg.lr = r.f64();
    st.cfg.beta1 = r.f64();
    st.cfg.beta2 = r.f64();
    st.cfg.eps = r.f64();
    r.f64_block(st.m.data(), n);
    r.f64_block(st.v.data(), n);
    ck.opt = std::move(st);
  }
  return ck;
}

Checkpoint load_checkpoint(const std::string& path, const GroupSpec& expected) {
  Checkpoint ck = load_checkpoint(path);
  if (!(ck.net.spec == expected))
    throw IncompatibleError("checkpoint group " + std::string(to_string(ck.net.spec.kind)) +
                            " does not match requested " + to_string(expected.kind));
  return ck;
}

}  // namespace lieflow
