#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "lieflow/datasets.hpp"
#include "lieflow/runio.hpp"

using namespace lieflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Set-wise distance: does some vertex permutation match g*cloud to cloud?
bool fixes_point_set(const Eigen::MatrixXd& verts, const Eigen::MatrixXd& mapped, double tol) {
  const Eigen::Index n = verts.rows();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if ((mapped.row(i) - verts.row(j)).norm() <= tol) {
        used[static_cast<std::size_t>(j)] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool has_nontrivial_stabilizer(const PointCloud& cloud,
                               const std::vector<Eigen::MatrixXd>& candidates, double tol) {
  for (const auto& m : candidates) {
    if ((m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).norm() < 1e-9) continue;
    if (fixes_point_set(cloud.re, cloud.re * m.transpose(), tol)) return true;
  }
  return false;
}

std::vector<Eigen::MatrixXd> c8_and_reflections() {
  std::vector<Eigen::MatrixXd> out;
  Eigen::Matrix2d mirror;
  mirror << 1, 0, 0, -1;
  for (int k = 0; k < 8; ++k) {
    Eigen::Matrix2d r = rot2d(k * kPi / 4);
    out.push_back(r);
    out.push_back(r * mirror);
  }
  return out;
}

std::vector<Eigen::MatrixXd> oct_matrices() {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& e : discrete_group(DiscreteGroupName::Oct).elements) out.push_back(e.mat.re);
  return out;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("canonical arrow: 7 vertices, centroid exactly at the origin") {
  PointCloud arrow = canonical_object(ObjectKind::Arrow2D);
  CHECK(arrow.point_count() == 7);
  CHECK(arrow.dim == 2);
  CHECK(arrow.re.colwise().sum().norm() == 0.0);
  // No nontrivial rotation fixes it (C8 probe).
  std::vector<Eigen::MatrixXd> rotations;
  for (int k = 1; k < 8; ++k) rotations.push_back(rot2d(k * kPi / 4));
  for (const auto& r : rotations)
    CHECK(!fixes_point_set(arrow.re, arrow.re * r.transpose(), 1e-6));
}

TEST_CASE("half arrow has no nontrivial stabilizer in O(2)") {
  PointCloud half = canonical_object(ObjectKind::HalfArrow2D);
  CHECK(!has_nontrivial_stabilizer(half, c8_and_reflections(), 1e-6));
}

TEST_CASE("irregular tetrahedron: distinct edges, no Oct stabilizer") {
  PointCloud tet = canonical_object(ObjectKind::IrregularTetrahedron3D);
  REQUIRE(tet.point_count() == 4);
  std::vector<double> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) edges.push_back((tet.re.row(i) - tet.re.row(j)).norm());
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) CHECK(edges[i + 1] - edges[i] > 0.05);
  CHECK(!has_nontrivial_stabilizer(tet, oct_matrices(), 1e-6));
}

TEST_CASE("multi-object shapes are all asymmetric under Oct") {
  const auto& shapes = multi_object_shapes();
  REQUIRE(shapes.size() == 4);
  std::set<Eigen::Index> counts;
  for (const auto& s : shapes) {
    counts.insert(s.point_count());
    CHECK(!has_nontrivial_stabilizer(s, oct_matrices(), 1e-6));
  }
  CHECK(shapes[0].point_count() == 4);
}

TEST_CASE("transformation acts pointwise") {
  PointCloud tet = canonical_object(ObjectKind::IrregularTetrahedron3D);
  GroupSpec so3 = GroupSpec::make(GroupKind::SO3);
  Rng rng(5);
  GroupElement g = sample_prior(so3, rng);
  PointCloud moved = tet.transformed(g);
  for (Eigen::Index p = 0; p < tet.point_count(); ++p) {
    Eigen::Vector3d expect = g.mat.re * tet.re.row(p).transpose();
    CHECK((moved.re.row(p).transpose() - expect).norm() < 1e-14);
  }
}

TEST_CASE("generate C4 dataset: orbit membership and mode balance") {
  DatasetSpec spec{ObjectKind::Arrow2D, TargetKind::C4, 1000, 7};
  Dataset ds = generate_dataset(spec);
  REQUIRE(ds.samples.size() == 1000);
  const PointCloud arrow = canonical_object(ObjectKind::Arrow2D);
  const auto& c4 = discrete_group(DiscreteGroupName::C4);
  std::vector<int> counts(4, 0);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    // Orbit consistency: the sample matches exactly one orbit configuration.
    double best = 1e9;
    int best_k = -1;
    for (int k = 0; k < 4; ++k) {
      double d = (ds.samples[i].re - arrow.transformed(c4.elements[static_cast<std::size_t>(k)]).re).norm();
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    CHECK(best <= 1e-10);
    ++counts[static_cast<std::size_t>(best_k)];
    CHECK((ds.samples[i].re - arrow.transformed(ds.ground_truth[i]).re).norm() <= 1e-10);
  }
  // Multinomial oracle: each mode within 3 sigma of 250.
  double sigma = std::sqrt(1000 * 0.25 * 0.75);
  for (int c : counts) CHECK(std::abs(c - 250.0) <= 3 * sigma);
}

TEST_CASE("Gaussian SO2 dataset: angle std close to pi/4") {
  DatasetSpec spec{ObjectKind::IrregularTetrahedron3D, TargetKind::GaussianSO2, 5000, 11};
  Dataset ds = generate_dataset(spec);
  double sum = 0, sum2 = 0;
  for (const auto& g : ds.ground_truth) {
    double theta = std::atan2(g.mat.re(1, 0), g.mat.re(0, 0));
    sum += theta;
    sum2 += theta * theta;
  }
  double n = static_cast<double>(ds.ground_truth.size());
  double stddev = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  CHECK(std::abs(stddev - kPi / 4) < 0.03);
  // z row/column untouched.
  for (const auto& g : ds.ground_truth) {
    CHECK(g.mat.re(2, 2) == doctest::Approx(1.0));
    CHECK(std::abs(g.mat.re(0, 2)) < 1e-15);
  }
}

TEST_CASE("multi-object dataset uses all four shapes with Tet transforms") {
  DatasetSpec spec{ObjectKind::MultiObject3D, TargetKind::Tet, 2000, 13};
  Dataset ds = generate_dataset(spec);
  std::vector<int> obj_counts(4, 0);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    ++obj_counts[static_cast<std::size_t>(ds.object_index[i])];
    CHECK((ds.samples[i].re - ds.canonical_of(static_cast<std::int64_t>(i)).transformed(ds.ground_truth[i]).re).norm() <= 1e-10);
  }
  for (int c : obj_counts) CHECK(c > 300);  // roughly balanced
  CHECK(spec.max_points() == 8);
}

TEST_CASE("empty dataset is valid") {
  DatasetSpec spec{ObjectKind::Arrow2D, TargetKind::C4, 0, 3};
  Dataset ds = generate_dataset(spec);
  CHECK(ds.samples.empty());
  std::string path = temp_path("lf_empty.bin");
  save_dataset(ds, path);
  LoadedDataset back = load_dataset(path);
  CHECK(back.dataset.samples.empty());
  CHECK(back.warnings.empty());
  std::remove(path.c_str());
}

TEST_CASE("dataset determinism") {
  DatasetSpec spec{ObjectKind::IrregularTetrahedron3D, TargetKind::Tet, 200, 99};
  Dataset a = generate_dataset(spec);
  Dataset b = generate_dataset(spec);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK((a.samples[i].re - b.samples[i].re).norm() == 0.0);
    CHECK(frobenius_distance(a.ground_truth[i].mat, b.ground_truth[i].mat) == 0.0);
  }
}

TEST_CASE("train/test split is a deterministic index hash near 90/10") {
  DatasetSpec spec{ObjectKind::Arrow2D, TargetKind::C4, 5000, 21};
  Dataset ds = generate_dataset(spec);
  auto train = ds.train_indices();
  auto test = ds.test_indices();
  CHECK(train.size() + test.size() == 5000);
  CHECK(test.size() > 350);
  CHECK(test.size() < 650);
  Dataset again = generate_dataset(spec);
  CHECK(again.test_indices() == test);
}

TEST_CASE("dataset save/load round trip is bit exact") {
  DatasetSpec spec{ObjectKind::MultiObject3D, TargetKind::Tet, 100, 31};
  Dataset ds = generate_dataset(spec);
  std::string path = temp_path("lf_roundtrip.bin");
  save_dataset(ds, path);
  LoadedDataset back = load_dataset(path);
  REQUIRE(back.dataset.samples.size() == ds.samples.size());
  CHECK(back.dataset.spec.seed == ds.spec.seed);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK((back.dataset.samples[i].re - ds.samples[i].re).norm() == 0.0);
    CHECK(frobenius_distance(back.dataset.ground_truth[i].mat, ds.ground_truth[i].mat) == 0.0);
    CHECK(back.dataset.object_index[i] == ds.object_index[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("truncated dataset file raises a parse error naming the record") {
  DatasetSpec spec{ObjectKind::Arrow2D, TargetKind::C4, 50, 37};
  Dataset ds = generate_dataset(spec);
  std::string path = temp_path("lf_trunc.bin");
  save_dataset(ds, path);
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 40);
  bool threw = false;
  try {
    load_dataset(path);
  } catch (const ParseError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("sample") != std::string::npos);
  }
  CHECK(threw);
  std::remove(path.c_str());
}

TEST_CASE("unknown trailing header fields load with a warning") {
  DatasetSpec spec{ObjectKind::Arrow2D, TargetKind::C4, 5, 41};
  Dataset ds = generate_dataset(spec);
  std::string path = temp_path("lf_fwd.bin");
  // Write a header that carries an extra field.
  BinaryWriter w(path);
  w.magic("LFDS", 1);
  KvBlock kv;
  kv.set("format", "dataset");
  kv.set("object", to_string(ds.spec.object));
  kv.set("target", to_string(ds.spec.target));
  kv.set_i64("sample_count", ds.spec.sample_count);
  kv.set_u64("seed", ds.spec.seed);
  kv.set_f64("angle_sigma", ds.spec.angle_sigma);
  kv.set_i64("dim", 2);
  kv.set_i64("truth_dim", 2);
  kv.set_i64("max_points", 7);
  kv.set("future_field", "whatever");
  w.text_block(kv.serialize());
  w.u64(ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    w.u32(0);
    w.u32(static_cast<std::uint32_t>(ds.samples[i].point_count()));
    for (Eigen::Index p = 0; p < ds.samples[i].point_count(); ++p)
      for (int d = 0; d < 2; ++d) w.f64(ds.samples[i].re(p, d));
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) w.f64(ds.ground_truth[i].mat.re(r, c));
  }
  w.close();
  LoadedDataset back = load_dataset(path);
  REQUIRE(back.warnings.size() == 1);
  CHECK(back.warnings[0].find("future_field") != std::string::npos);
  CHECK(back.dataset.samples.size() == 5);
  std::remove(path.c_str());
}

TEST_CASE("flatten pads and interleaves") {
  PointCloud c;
  c.dim = 2;
  c.re.resize(2, 2);
  c.re << 1, 2, 3, 4;
  Eigen::VectorXd flat = c.flatten(3);
  REQUIRE(flat.size() == 6);
  CHECK(flat[0] == 1);
  CHECK(flat[3] == 4);
  CHECK(flat[4] == 0);
  c.im = c.re * 10;
  Eigen::VectorXd cflat = c.flatten(2);
  REQUIRE(cflat.size() == 8);
  CHECK(cflat[0] == 1);
  CHECK(cflat[1] == 10);
  CHECK(cflat[2] == 2);
  CHECK(cflat[3] == 20);
}
