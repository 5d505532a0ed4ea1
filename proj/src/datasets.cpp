#include "lieflow/datasets.hpp"

#include <cmath>

#include "lieflow/runio.hpp"

namespace lieflow {

namespace {
constexpr double kPi = 3.14159265358979323846;

PointCloud cloud_from_rows(int dim, std::initializer_list<std::initializer_list<double>> rows) {
  PointCloud c;
  c.dim = dim;
  c.re.resize(static_cast<Eigen::Index>(rows.size()), dim);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) c.re(r, j++) = v;
    ++r;
  }
  return c;
}
}  // namespace

PointCloud PointCloud::transformed(const GroupElement& g) const {
  const Mat& m = g.mat;
  bool complex_action =
      m.is_complex() && m.im.cwiseAbs().maxCoeff() > 0.0;
  PointCloud out;
  out.dim = dim;
  if (!complex_action && !is_complex()) {
    out.re = re * m.re.transpose();
    return out;
  }
  Eigen::MatrixXd cre = re;
  Eigen::MatrixXd cim = is_complex() ? im : Eigen::MatrixXd::Zero(re.rows(), re.cols());
  Eigen::MatrixXd gre = m.re;
  Eigen::MatrixXd gim = m.is_complex() ? m.im : Eigen::MatrixXd::Zero(m.rows(), m.cols());
  out.re = cre * gre.transpose() - cim * gim.transpose();
  out.im = cre * gim.transpose() + cim * gre.transpose();
  return out;
}

Eigen::VectorXd PointCloud::flatten(Eigen::Index pad_points) const {
  if (pad_points < point_count())
    throw ContractError("PointCloud::flatten: pad smaller than point count");
  const bool cplx = is_complex();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(flat_size(pad_points));
  Eigen::Index k = 0;
  for (Eigen::Index p = 0; p < point_count(); ++p)
    for (int d = 0; d < dim; ++d) {
      v[k++] = re(p, d);
      if (cplx) v[k++] = im(p, d);
    }
  return v;
}

const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Arrow2D: return "arrow2d";
    case ObjectKind::HalfArrow2D: return "half_arrow2d";
    case ObjectKind::IrregularTetrahedron3D: return "irregular_tetrahedron3d";
    case ObjectKind::MultiObject3D: return "multi_object3d";
  }
  return "?";
}

const char* to_string(TargetKind k) {
  switch (k) {
    case TargetKind::C4: return "C4";
    case TargetKind::D4: return "D4";
    case TargetKind::Tet: return "Tet";
    case TargetKind::Oct: return "Oct";
    case TargetKind::Ico: return "Ico";
    case TargetKind::SO2AroundZ: return "SO2aroundZ";
    case TargetKind::GaussianSO2: return "GaussianSO2";
  }
  return "?";
}

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "arrow2d") return ObjectKind::Arrow2D;
  if (s == "half_arrow2d") return ObjectKind::HalfArrow2D;
  if (s == "irregular_tetrahedron3d") return ObjectKind::IrregularTetrahedron3D;
  if (s == "multi_object3d") return ObjectKind::MultiObject3D;
  throw ParseError("unknown object kind: " + s);
}

TargetKind target_kind_from_string(const std::string& s) {
  if (s == "C4") return TargetKind::C4;
  if (s == "D4") return TargetKind::D4;
  if (s == "Tet") return TargetKind::Tet;
  if (s == "Oct") return TargetKind::Oct;
  if (s == "Ico") return TargetKind::Ico;
  if (s == "SO2aroundZ") return TargetKind::SO2AroundZ;
  if (s == "GaussianSO2") return TargetKind::GaussianSO2;
  throw ParseError("unknown target kind: " + s);
}

PointCloud canonical_object(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::Arrow2D:
      // Dyadic coordinates, so the centroid is exactly the origin.
      return cloud_from_rows(2, {{1.375, 0.0},
                                 {0.375, 0.625},
                                 {0.375, 0.25},
                                 {-1.4375, 0.25},
                                 {-1.4375, -0.25},
                                 {0.375, -0.25},
                                 {0.375, -0.625}});
    case ObjectKind::HalfArrow2D:
      // Barb on one side only; no nontrivial stabilizer in O(2).
      return cloud_from_rows(2, {{1.25, 0.0},
                                 {0.375, 0.75},
                                 {0.375, 0.25},
                                 {-1.25, 0.25},
                                 {-1.25, -0.25},
                                 {0.375, -0.25}});
    case ObjectKind::IrregularTetrahedron3D:
      // All six edge lengths distinct (pairwise gaps > 0.05).
      return cloud_from_rows(3, {{1.05, 0.15, 0.1},
                                 {-0.35, 0.9, -0.2},
                                 {-0.3, -0.85, 0.5},
                                 {0.05, -0.1, -0.95}});
    case ObjectKind::MultiObject3D:
      throw ContractError("canonical_object: MultiObject3D has per-sample shapes");
  }
  throw ContractError("canonical_object: bad kind");
}

const std::vector<PointCloud>& multi_object_shapes() {
  static const std::vector<PointCloud> shapes = [] {
    std::vector<PointCloud> s;
    s.push_back(canonical_object(ObjectKind::IrregularTetrahedron3D));
    // Irregular triangular prism (skewed top face).
    s.push_back(cloud_from_rows(3, {{1.0, 0.0, -0.55},
                                    {-0.45, 0.75, -0.6},
                                    {-0.4, -0.8, -0.5},
                                    {0.85, 0.1, 0.65},
                                    {-0.35, 0.6, 0.7},
                                    {-0.3, -0.65, 0.75}}));
    // Irregular cuboid.
    s.push_back(cloud_from_rows(3, {{0.8, 0.7, 0.6},
                                    {0.75, 0.65, -0.7},
                                    {0.7, -0.8, 0.55},
                                    {0.85, -0.7, -0.6},
                                    {-0.7, 0.8, 0.5},
                                    {-0.75, 0.7, -0.65},
                                    {-0.8, -0.75, 0.7},
                                    {-0.65, -0.6, -0.75}}));
    // Irregular octahedron (perturbed axis vertices).
    s.push_back(cloud_from_rows(3, {{0.9, 0.05, 0.1},
                                    {-0.85, 0.1, -0.05},
                                    {0.05, 0.8, -0.1},
                                    {-0.1, -0.75, 0.05},
                                    {0.1, -0.05, 0.95},
                                    {0.05, 0.1, -0.8}}));
    return s;
  }();
  return shapes;
}

void DatasetSpec::validate() const {
  if (sample_count < 0) throw ContractError("DatasetSpec: negative sample count");
  bool object_3d = object == ObjectKind::IrregularTetrahedron3D || object == ObjectKind::MultiObject3D;
  bool target_3d = target != TargetKind::C4 && target != TargetKind::D4;
  if (object_3d != target_3d)
    throw ContractError("DatasetSpec: object/target dimension mismatch");
  if (target == TargetKind::GaussianSO2) {
    if (!object_3d) throw ContractError("DatasetSpec: GaussianSO2 requires a 3D object");
    if (!(angle_sigma > 0)) throw ContractError("DatasetSpec: angle_sigma must be positive");
  }
}

int DatasetSpec::cloud_dim() const {
  return (object == ObjectKind::Arrow2D || object == ObjectKind::HalfArrow2D) ? 2 : 3;
}

GroupSpec DatasetSpec::truth_spec() const {
  switch (target) {
    case TargetKind::C4: return GroupSpec::make(GroupKind::SO2);
    case TargetKind::D4: return GroupSpec::make(GroupKind::GL2C);
    default: return GroupSpec::make(GroupKind::SO3);
  }
}

Eigen::Index DatasetSpec::max_points() const {
  if (object == ObjectKind::MultiObject3D) {
    Eigen::Index m = 0;
    for (const auto& s : multi_object_shapes()) m = std::max(m, s.point_count());
    return m;
  }
  return canonical_object(object).point_count();
}

const PointCloud& Dataset::canonical_of(std::int64_t i) const {
  static const PointCloud arrow = canonical_object(ObjectKind::Arrow2D);
  static const PointCloud half = canonical_object(ObjectKind::HalfArrow2D);
  static const PointCloud tet = canonical_object(ObjectKind::IrregularTetrahedron3D);
  if (spec.object == ObjectKind::MultiObject3D)
    return multi_object_shapes()[static_cast<std::size_t>(object_index[static_cast<std::size_t>(i)])];
  switch (spec.object) {
    case ObjectKind::Arrow2D: return arrow;
    case ObjectKind::HalfArrow2D: return half;
    default: return tet;
  }
}

namespace {
constexpr std::uint64_t kSplitTag = 0x73706C6974ULL;  // "split"
}

bool Dataset::is_test(std::int64_t i) const {
  return hash_mix(spec.seed ^ kSplitTag, static_cast<std::uint64_t>(i)) % 10 == 0;
}

std::vector<std::int64_t> Dataset::train_indices() const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(samples.size()); ++i)
    if (!is_test(i)) out.push_back(i);
  return out;
}

std::vector<std::int64_t> Dataset::test_indices() const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(samples.size()); ++i)
    if (is_test(i)) out.push_back(i);
  return out;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.samples.reserve(static_cast<std::size_t>(spec.sample_count));
  ds.ground_truth.reserve(static_cast<std::size_t>(spec.sample_count));
  ds.object_index.reserve(static_cast<std::size_t>(spec.sample_count));
  const GroupSpec tspec = spec.truth_spec();
  const Rng base = Rng(spec.seed).substream(stream::kDataset);

  const DiscreteGroupTable* table = nullptr;
  switch (spec.target) {
    case TargetKind::C4: table = &discrete_group(DiscreteGroupName::C4); break;
    case TargetKind::D4: table = &discrete_group(DiscreteGroupName::D4); break;
    case TargetKind::Tet: table = &discrete_group(DiscreteGroupName::Tet); break;
    case TargetKind::Oct: table = &discrete_group(DiscreteGroupName::Oct); break;
    case TargetKind::Ico: table = &discrete_group(DiscreteGroupName::Ico); break;
    default: break;
  }

  for (std::int64_t i = 0; i < spec.sample_count; ++i) {
    Rng rng = base.substream(static_cast<std::uint64_t>(i));
    int obj = 0;
    if (spec.object == ObjectKind::MultiObject3D)
      obj = static_cast<int>(rng.uniform_index(static_cast<std::int64_t>(multi_object_shapes().size())));
    GroupElement g = GroupElement::identity(tspec);
    if (table != nullptr) {
      g = table->elements[static_cast<std::size_t>(rng.uniform_index(table->order))];
    } else if (spec.target == TargetKind::SO2AroundZ) {
      g = GroupElement::unchecked(tspec, Mat(rot_z(rng.uniform(-kPi, kPi))));
    } else {  // GaussianSO2
      g = GroupElement::unchecked(tspec, Mat(rot_z(spec.angle_sigma * rng.normal())));
    }
    const PointCloud& canon = (spec.object == ObjectKind::MultiObject3D)
                                  ? multi_object_shapes()[static_cast<std::size_t>(obj)]
                                  : canonical_object(spec.object);
    ds.samples.push_back(canon.transformed(g));
    ds.ground_truth.push_back(std::move(g));
    ds.object_index.push_back(obj);
  }
  return ds;
}

namespace {
const std::vector<std::string> kDatasetKeys = {
    "format", "version", "object", "target", "sample_count",
    "seed",   "angle_sigma", "dim", "truth_dim", "max_points"};
}

void save_dataset(const Dataset& ds, const std::string& path) {
  BinaryWriter w(path);
  w.magic("LFDS", 1);
  KvBlock kv;
  kv.set("format", "dataset");
  kv.set("object", to_string(ds.spec.object));
  kv.set("target", to_string(ds.spec.target));
  kv.set_i64("sample_count", ds.spec.sample_count);
  kv.set_u64("seed", ds.spec.seed);
  kv.set_f64("angle_sigma", ds.spec.angle_sigma);
  kv.set_i64("dim", ds.spec.cloud_dim());
  kv.set_i64("truth_dim", ds.spec.truth_spec().matrix_dim);
  kv.set_i64("max_points", ds.spec.max_points());
  w.text_block(kv.serialize());
  w.u64(ds.samples.size());
  const int dim = ds.spec.cloud_dim();
  const int tdim = ds.spec.truth_spec().matrix_dim;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const PointCloud& c = ds.samples[i];
    w.u32(static_cast<std::uint32_t>(ds.object_index[i]));
    w.u32(static_cast<std::uint32_t>(c.point_count()));
    for (Eigen::Index p = 0; p < c.point_count(); ++p)
      for (int d = 0; d < dim; ++d) w.f64(c.re(p, d));
    const Mat& m = ds.ground_truth[i].mat;
    for (int r = 0; r < tdim; ++r)
      for (int cidx = 0; cidx < tdim; ++cidx) w.f64(m.re(r, cidx));
  }
  w.close();
}

LoadedDataset load_dataset(const std::string& path) {
  BinaryReader r(path);
  std::uint32_t version = r.magic("LFDS");
  if (version < 1) throw ParseError("unsupported dataset version in " + path);
  KvBlock kv = KvBlock::parse(r.text_block());
  LoadedDataset out;
  for (const auto& k : kv.unknown_keys(kDatasetKeys))
    out.warnings.push_back("unknown header field ignored: " + k);
  if (version > 1)
    out.warnings.push_back("dataset version " + std::to_string(version) +
                           " is newer than this reader; extra fields ignored");
  Dataset& ds = out.dataset;
  ds.spec.object = object_kind_from_string(kv.get("object"));
  ds.spec.target = target_kind_from_string(kv.get("target"));
  ds.spec.sample_count = kv.get_i64("sample_count");
  ds.spec.seed = kv.get_u64("seed");
  ds.spec.angle_sigma = kv.get_f64("angle_sigma");
  const int dim = static_cast<int>(kv.get_i64("dim"));
  const int tdim = static_cast<int>(kv.get_i64("truth_dim"));
  if (dim != ds.spec.cloud_dim())
    throw ParseError("dataset header: dim does not match object kind");
  const GroupSpec tspec = ds.spec.truth_spec();
  if (tdim != tspec.matrix_dim)
    throw ParseError("dataset header: truth_dim does not match target kind");
  std::uint64_t n = r.u64();
  if (n != static_cast<std::uint64_t>(ds.spec.sample_count))
    throw ParseError("dataset payload count disagrees with header in " + path);
  ds.samples.reserve(n);
  ds.ground_truth.reserve(n);
  ds.object_index.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    r.set_context("sample " + std::to_string(i));
    std::uint32_t obj = r.u32();
    std::uint32_t npts = r.u32();
    if (npts == 0 || npts > 1024)
      throw ParseError("sample " + std::to_string(i) + ": implausible point count " +
                       std::to_string(npts));
    PointCloud c;
    c.dim = dim;
    c.re.resize(npts, dim);
    for (std::uint32_t p = 0; p < npts; ++p)
      for (int d = 0; d < dim; ++d) c.re(p, d) = r.f64();
    Mat m(Eigen::MatrixXd(tdim, tdim));
    for (int rr = 0; rr < tdim; ++rr)
      for (int cc = 0; cc < tdim; ++cc) m.re(rr, cc) = r.f64();
    if (tspec.is_complex()) m = m.as_complex();
    ds.samples.push_back(std::move(c));
    ds.ground_truth.push_back(GroupElement::unchecked(tspec, std::move(m)));
    ds.object_index.push_back(static_cast<int>(obj));
  }
  return out;
}

}  // namespace lieflow
