#pragma once

#include <string>
#include <vector>

#include "lieflow/liegroup.hpp"

namespace lieflow {

/// Ordered list of d-dimensional points (d = 2 or 3), one row per point.
/// Clouds transformed by a complex group carry an `im` block of the same
/// shape; dataset samples themselves are always real.
struct PointCloud {
  int dim = 0;
  Eigen::MatrixXd re;  // n_points x dim
  Eigen::MatrixXd im;  // empty unless complex

  Eigen::Index point_count() const { return re.rows(); }
  bool is_complex() const { return im.size() > 0; }

  /// Pointwise left action: row i becomes (g.mat * points_i)^T.
  PointCloud transformed(const GroupElement& g) const;

  Eigen::VectorXd centroid_re() const { return re.colwise().mean(); }

  /// Row-major (point-major) flattening, zero-padded to `pad_points` points.
  /// Complex clouds interleave re/im per scalar.
  Eigen::VectorXd flatten(Eigen::Index pad_points) const;
  Eigen::Index flat_size(Eigen::Index pad_points) const {
    return pad_points * dim * (is_complex() ? 2 : 1);
  }
};

enum class ObjectKind { Arrow2D, HalfArrow2D, IrregularTetrahedron3D, MultiObject3D };
enum class TargetKind { C4, D4, Tet, Oct, Ico, SO2AroundZ, GaussianSO2 };

const char* to_string(ObjectKind k);
const char* to_string(TargetKind k);
ObjectKind object_kind_from_string(const std::string& s);
TargetKind target_kind_from_string(const std::string& s);

/// The canonical vertex list of a single object. For MultiObject3D use
/// multi_object_shapes().
PointCloud canonical_object(ObjectKind kind);

/// The four irregular shapes of the multi-object dataset
/// (tetrahedron, triangular prism, cuboid, bipyramid), max 8 vertices.
const std::vector<PointCloud>& multi_object_shapes();

struct DatasetSpec {
  ObjectKind object = ObjectKind::Arrow2D;
  TargetKind target = TargetKind::C4;
  std::int64_t sample_count = 0;
  std::uint64_t seed = 0;
  double angle_sigma = 0.7853981633974483;  // pi/4, GaussianSO2 only

  void validate() const;
  int cloud_dim() const;
  /// Natural group spec of the ground-truth transforms (SO2 for C4,
  /// GL2C for D4, SO3 otherwise).
  GroupSpec truth_spec() const;
  /// Largest vertex count over the objects this spec can draw.
  Eigen::Index max_points() const;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<PointCloud> samples;
  std::vector<GroupElement> ground_truth;
  std::vector<int> object_index;  // always 0 except MultiObject3D

  /// Canonical object of sample i (MultiObject picks per-sample shapes).
  const PointCloud& canonical_of(std::int64_t i) const;

  /// Deterministic 90/10 split by sample-index hash.
  bool is_test(std::int64_t i) const;
  std::vector<std::int64_t> train_indices() const;
  std::vector<std::int64_t> test_indices() const;
};

Dataset generate_dataset(const DatasetSpec& spec);

void save_dataset(const Dataset& ds, const std::string& path);

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::string> warnings;  // unknown header fields, etc.
};
LoadedDataset load_dataset(const std::string& path);

}  // namespace lieflow
