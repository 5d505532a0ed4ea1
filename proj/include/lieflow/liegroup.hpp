#pragma once

#include <array>
#include <string>
#include <vector>

#include "lieflow/matrix.hpp"
#include "lieflow/rng.hpp"

namespace lieflow {

enum class GroupKind { SO2, SO3, GL2RPlus, GL2C };
enum class Field { Real, Complex };

const char* to_string(GroupKind k);
GroupKind group_kind_from_string(const std::string& s);

/// Identifies a hypothesis group and its fixed structural constants.
struct GroupSpec {
  GroupKind kind = GroupKind::SO2;
  int matrix_dim = 2;
  Field field = Field::Real;
  int algebra_dim = 1;

  static GroupSpec make(GroupKind kind);
  bool operator==(const GroupSpec&) const = default;
  bool is_complex() const { return field == Field::Complex; }
  bool is_rotation_group() const { return kind == GroupKind::SO2 || kind == GroupKind::SO3; }
};

/// Element of the group carried by `spec`. Construction via `make` validates
/// the group membership invariants; `unchecked` skips them for values that
/// are products of already-validated elements.
struct GroupElement {
  GroupSpec spec;
  Mat mat;

  static GroupElement make(const GroupSpec& spec, Mat m);
  static GroupElement unchecked(const GroupSpec& spec, Mat m) { return GroupElement{spec, std::move(m)}; }
  static GroupElement identity(const GroupSpec& spec) {
    return GroupElement{spec, Mat::identity(spec.matrix_dim, spec.is_complex())};
  }

  GroupElement inverse() const;
  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);
};

/// Tangent (Lie algebra) element: matrix plus its coefficients in the fixed
/// generator basis of the group.
struct AlgebraElement {
  GroupSpec spec;
  Mat mat;
  Eigen::VectorXd coeffs;

  static AlgebraElement from_coeffs(const GroupSpec& spec, Eigen::VectorXd c);
  static AlgebraElement zero(const GroupSpec& spec) {
    return from_coeffs(spec, Eigen::VectorXd::Zero(spec.algebra_dim));
  }
};

/// Fixed generator basis {L_i} of the group's algebra.
const std::vector<Mat>& algebra_basis(GroupKind kind);

/// Projection of an algebra matrix onto basis coefficients (exact for these
/// bases; entries are read off directly).
Eigen::VectorXd algebra_coeffs_of(const GroupSpec& spec, const Mat& m);

enum class DiscreteGroupName { C4, D4, Tet, Oct, Ico, SO2AroundZ };

const char* to_string(DiscreteGroupName n);
DiscreteGroupName discrete_group_from_string(const std::string& s);

/// Finite rotation-group table, or the continuous z-axis family which stores
/// only its axis.
struct DiscreteGroupTable {
  DiscreteGroupName name = DiscreteGroupName::C4;
  std::vector<GroupElement> elements;  // empty for SO2AroundZ
  int order = 0;                       // 0 for SO2AroundZ
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();  // set for SO2AroundZ only
};

// -- Operations ------------------------------------------------------------

/// Matrix exponential: closed form for SO2/SO3, scaling-and-squaring with a
/// degree-18 Taylor tail for GL2. Rejects ||A||_F > 50.
GroupElement mat_exp(const AlgebraElement& a);

/// Principal-branch matrix logarithm. SO2/SO3 throw CutLocusError within
/// 1e-6 of angle pi; GL2 requires eigenvalues off the closed negative real
/// axis and uses inverse scaling-and-squaring (Denman-Beavers square roots,
/// then the Mercator series).
AlgebraElement mat_log(const GroupElement& g);

/// Prior sampler: uniform angle for SO2, Haar (normalized Gaussian
/// quaternion) for SO3, exp of U[-pi/2, pi/2] algebra coefficients for GL2.
GroupElement sample_prior(const GroupSpec& spec, Rng& rng);

const DiscreteGroupTable& discrete_group(DiscreteGroupName name);

/// Special-orthogonal polar factor of a full-rank real matrix. If the
/// orthogonal factor has det -1, the column belonging to the smallest
/// singular value is negated.
GroupElement polar_rotation(const GroupElement& g);

struct EulerAngles {
  double yaw = 0;    // about z (applied first in the intrinsic Z-Y-X order)
  double pitch = 0;  // about y, in [-pi/2, pi/2]
  double roll = 0;   // about x
  bool gimbal_lock = false;
};

/// SO2 -> single angle in (-pi, pi] (returned in yaw); SO3 -> intrinsic
/// Z-Y-X Euler angles. At gimbal lock (|pitch| within 1e-6 of pi/2) roll is
/// set to 0 and the full twist is reported as yaw.
EulerAngles rotation_to_angles(const GroupElement& g);

Eigen::Matrix3d euler_to_matrix(const EulerAngles& e);

/// Rotation axis (unit) and angle in [0, pi] of a 3x3 rotation, stable at
/// both the identity and the cut locus (quaternion extraction).
std::pair<Eigen::Vector3d, double> rotation_axis_angle(const Eigen::Matrix3d& r);

/// Standard Mollweide forward projection (R = 1), Newton-solved to 1e-10.
/// lon in [-pi, pi], lat in [-pi/2, pi/2].
std::pair<double, double> mollweide_project(double lon, double lat);

// -- Small constructors shared across modules -------------------------------

Eigen::Matrix2d rot2d(double theta);
Eigen::Matrix3d rot_z(double theta);

/// Re-tag an element into a larger hypothesis group (e.g. SO2 -> GL2R+,
/// any real 2x2 -> GL2C). Throws ContractError if the embedding is invalid.
GroupElement lift(const GroupElement& g, const GroupSpec& target);

}  // namespace lieflow
