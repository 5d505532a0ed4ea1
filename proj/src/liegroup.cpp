#include "lieflow/liegroup.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace lieflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::SO2: return "SO2";
    case GroupKind::SO3: return "SO3";
    case GroupKind::GL2RPlus: return "GL2R+";
    case GroupKind::GL2C: return "GL2C";
  }
  return "?";
}

GroupKind group_kind_from_string(const std::string& s) {
  if (s == "SO2") return GroupKind::SO2;
  if (s == "SO3") return GroupKind::SO3;
  if (s == "GL2R+" || s == "GL2RPlus") return GroupKind::GL2RPlus;
  if (s == "GL2C") return GroupKind::GL2C;
  throw ParseError("unknown group kind: " + s);
}

GroupSpec GroupSpec::make(GroupKind kind) {
  switch (kind) {
    case GroupKind::SO2: return {kind, 2, Field::Real, 1};
    case GroupKind::SO3: return {kind, 3, Field::Real, 3};
    case GroupKind::GL2RPlus: return {kind, 2, Field::Real, 4};
    case GroupKind::GL2C: return {kind, 2, Field::Complex, 8};
  }
  throw ContractError("GroupSpec::make: bad kind");
}

GroupElement GroupElement::make(const GroupSpec& spec, Mat m) {
  if (m.rows() != spec.matrix_dim || m.cols() != spec.matrix_dim)
    throw ContractError("GroupElement: matrix dimension does not match spec");
  if (spec.is_complex() && !m.is_complex()) m = m.as_complex();
  if (!spec.is_complex() && m.is_complex())
    throw ContractError("GroupElement: complex matrix for a real group");
  switch (spec.kind) {
    case GroupKind::SO2:
    case GroupKind::SO3: {
      Eigen::MatrixXd gram = m.re.transpose() * m.re;
      double ortho = (gram - Eigen::MatrixXd::Identity(spec.matrix_dim, spec.matrix_dim)).norm();
      double d = m.re.determinant();
      if (ortho > 1e-8 || std::abs(d - 1.0) > 1e-8)
        throw ContractError("GroupElement: matrix is not special orthogonal");
      break;
    }
    case GroupKind::GL2RPlus: {
      if (det(m).real() <= 0.0) throw ContractError("GroupElement: det <= 0 for GL2R+");
      break;
    }
    case GroupKind::GL2C: {
      if (std::abs(det(m)) < 1e-12) throw ContractError("GroupElement: near-singular GL2C matrix");
      break;
    }
  }
  return GroupElement{spec, std::move(m)};
}

GroupElement GroupElement::inverse() const {
  if (spec.is_rotation_group()) return GroupElement{spec, mat.transpose()};
  return GroupElement{spec, lieflow::inverse(mat)};
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (!(a.spec == b.spec)) throw ContractError("GroupElement product: spec mismatch");
  return GroupElement{a.spec, a.mat * b.mat};
}

const std::vector<Mat>& algebra_basis(GroupKind kind) {
  static const std::vector<Mat> so2 = [] {
    Eigen::Matrix2d j;
    j << 0, -1, 1, 0;
    return std::vector<Mat>{Mat(j)};
  }();
  static const std::vector<Mat> so3 = [] {
    Eigen::Matrix3d lx, ly, lz;
    lx << 0, 0, 0, 0, 0, -1, 0, 1, 0;
    ly << 0, 0, 1, 0, 0, 0, -1, 0, 0;
    lz << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    return std::vector<Mat>{Mat(lx), Mat(ly), Mat(lz)};
  }();
  static const std::vector<Mat> gl2r = [] {
    std::vector<Mat> b;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        Eigen::Matrix2d e = Eigen::Matrix2d::Zero();
        e(r, c) = 1;
        b.emplace_back(e);
      }
    return b;
  }();
  // Same four matrix units with independent real and imaginary coefficients:
  // coefficients 0..3 are the real parts, 4..7 the imaginary parts.
  static const std::vector<Mat> gl2c = [] {
    std::vector<Mat> b;
    for (const Mat& e : gl2r) b.emplace_back(e.re, Eigen::MatrixXd::Zero(2, 2));
    for (const Mat& e : gl2r) b.emplace_back(Eigen::MatrixXd::Zero(2, 2), e.re);
    return b;
  }();
  switch (kind) {
    case GroupKind::SO2: return so2;
    case GroupKind::SO3: return so3;
    case GroupKind::GL2RPlus: return gl2r;
    case GroupKind::GL2C: return gl2c;
  }
  throw ContractError("algebra_basis: bad kind");
}

AlgebraElement AlgebraElement::from_coeffs(const GroupSpec& spec, Eigen::VectorXd c) {
  if (c.size() != spec.algebra_dim)
    throw ContractError("AlgebraElement: coefficient count does not match spec");
  const auto& basis = algebra_basis(spec.kind);
  Mat m = Mat::zero(spec.matrix_dim, spec.is_complex());
  for (int i = 0; i < spec.algebra_dim; ++i) m = m + c[i] * basis[i];
  return AlgebraElement{spec, std::move(m), std::move(c)};
}

Eigen::VectorXd algebra_coeffs_of(const GroupSpec& spec, const Mat& m) {
  Eigen::VectorXd c(spec.algebra_dim);
  switch (spec.kind) {
    case GroupKind::SO2:
      c[0] = m.re(1, 0);
      break;
    case GroupKind::SO3:
      c[0] = m.re(2, 1);
      c[1] = m.re(0, 2);
      c[2] = m.re(1, 0);
      break;
    case GroupKind::GL2RPlus:
      c << m.re(0, 0), m.re(0, 1), m.re(1, 0), m.re(1, 1);
      break;
    case GroupKind::GL2C: {
      Mat mc = m.as_complex();
      c << mc.re(0, 0), mc.re(0, 1), mc.re(1, 0), mc.re(1, 1),
           mc.im(0, 0), mc.im(0, 1), mc.im(1, 0), mc.im(1, 1);
      break;
    }
  }
  return c;
}

Eigen::Matrix2d rot2d(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

Eigen::Matrix3d rot_z(double theta) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r.topLeftCorner<2, 2>() = rot2d(theta);
  return r;
}

namespace {

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w) {
  double theta = w.norm();
  Eigen::Matrix3d k;
  k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  if (theta < 1e-8) {
    // exp(K) ~ I + K + K^2/2 for tiny angles.
    return Eigen::Matrix3d::Identity() + k + 0.5 * (k * k);
  }
  double a = std::sin(theta) / theta;
  double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * k + b * (k * k);
}

/// Scaling-and-squaring exponential for GL2: squaring count
/// max(0, ceil(log2 ||A||_F)) + 4, Taylor series truncated at term 18.
Mat exp_gl2(const Mat& a) {
  double norm = a.frobenius();
  int squarings = 4;
  if (norm > 1.0) squarings += static_cast<int>(std::ceil(std::log2(norm)));
  Mat scaled = std::ldexp(1.0, -squarings) * a;
  const bool cplx = a.is_complex();
  Mat result = Mat::identity(2, cplx);
  Mat term = Mat::identity(2, cplx);
  for (int k = 1; k <= 18; ++k) {
    term = (1.0 / k) * (term * scaled);
    result = result + term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// Principal square root via the Denman-Beavers iteration.
Mat sqrt_denman_beavers(const Mat& a) {
  Mat y = a.as_complex();
  Mat z = Mat::identity(2, true);
  for (int it = 0; it < 60; ++it) {
    Mat yn = 0.5 * (y + inverse(z));
    Mat zn = 0.5 * (z + inverse(y));
    double delta = frobenius_distance(yn, y);
    y = yn;
    z = zn;
    if (delta < 1e-15 * std::max(1.0, y.frobenius())) break;
  }
  return y;
}

/// Inverse scaling-and-squaring log for GL2: square-root until within 0.25
/// of the identity, then the Mercator series log(I + X).
Mat log_gl2(const Mat& g) {
  Mat s = g.as_complex();
  const Mat eye = Mat::identity(2, true);
  int halvings = 0;
  while (frobenius_distance(s, eye) >= 0.25) {
    s = sqrt_denman_beavers(s);
    if (++halvings > 60) throw RangeError("mat_log: square-root reduction did not converge");
  }
  Mat x = s - eye;
  Mat result = Mat::zero(2, true);
  Mat power = eye;
  for (int k = 1; k <= 30; ++k) {
    power = power * x;
    double sign = (k % 2 == 1) ? 1.0 : -1.0;
    result = result + (sign / k) * power;
  }
  return std::ldexp(1.0, halvings) * result;
}

}  // namespace

GroupElement mat_exp(const AlgebraElement& a) {
  if (a.mat.frobenius() > 50.0)
    throw RangeError("mat_exp: ||A||_F > 50");
  switch (a.spec.kind) {
    case GroupKind::SO2:
      return GroupElement::unchecked(a.spec, Mat(rot2d(a.coeffs[0])));
    case GroupKind::SO3:
      return GroupElement::unchecked(a.spec, Mat(rodrigues(a.coeffs.head<3>())));
    case GroupKind::GL2RPlus:
    case GroupKind::GL2C: {
      Mat e = exp_gl2(a.mat);
      if (!a.spec.is_complex()) e = Mat(e.re);
      return GroupElement::unchecked(a.spec, std::move(e));
    }
  }
  throw ContractError("mat_exp: bad spec");
}

AlgebraElement mat_log(const GroupElement& g) {
  const GroupSpec& spec = g.spec;
  switch (spec.kind) {
    case GroupKind::SO2: {
      double theta = std::atan2(g.mat.re(1, 0), g.mat.re(0, 0));
      if (std::abs(theta) > kPi - 1e-6)
        throw CutLocusError("mat_log: SO2 angle within 1e-6 of pi");
      return AlgebraElement::from_coeffs(spec, Eigen::VectorXd::Constant(1, theta));
    }
    case GroupKind::SO3: {
      const Eigen::MatrixXd& r = g.mat.re;
      double ct = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
      double angle = std::acos(ct);
      if (angle > kPi - 1e-6)
        throw CutLocusError("mat_log: SO3 angle within 1e-6 of pi");
      Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
      double f;
      if (angle < 1e-4) {
        // angle / (2 sin angle) = 1/2 + angle^2/12 + 7 angle^4/720 + ...
        double a2 = angle * angle;
        f = 0.5 + a2 / 12.0 + 7.0 * a2 * a2 / 720.0;
      } else {
        f = angle / (2.0 * std::sin(angle));
      }
      return AlgebraElement::from_coeffs(spec, (f * w).eval());
    }
    case GroupKind::GL2RPlus:
    case GroupKind::GL2C: {
      auto [l1, l2] = eigenvalues2(g.mat);
      for (const auto& l : {l1, l2}) {
        if (std::abs(l) < 1e-12)
          throw SingularityError("mat_log: singular GL2 matrix");
        if (l.real() < 0.0 && std::abs(l.imag()) <= 1e-12 * std::abs(l))
          throw CutLocusError("mat_log: eigenvalue on the negative real axis");
      }
      Mat lg = log_gl2(g.mat);
      if (!spec.is_complex()) lg = Mat(lg.re);
      return AlgebraElement{spec, lg, algebra_coeffs_of(spec, lg)};
    }
  }
  throw ContractError("mat_log: bad spec");
}

GroupElement sample_prior(const GroupSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case GroupKind::SO2: {
      double theta = rng.uniform(-kPi, kPi);
      return GroupElement::unchecked(spec, Mat(rot2d(theta)));
    }
    case GroupKind::SO3: {
      // Haar measure via normalized Gaussian quaternions.
      Eigen::Vector4d q;
      for (int i = 0; i < 4; ++i) q[i] = rng.normal();
      q.normalize();
      double w = q[0], x = q[1], y = q[2], z = q[3];
      Eigen::Matrix3d r;
      r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
           2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
           2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
      return GroupElement::unchecked(spec, Mat(r));
    }
    case GroupKind::GL2RPlus:
    case GroupKind::GL2C: {
      Eigen::VectorXd c(spec.algebra_dim);
      for (int i = 0; i < spec.algebra_dim; ++i) c[i] = rng.uniform(-kPi / 2.0, kPi / 2.0);
      return mat_exp(AlgebraElement::from_coeffs(spec, c));
    }
  }
  throw ContractError("sample_prior: bad spec");
}

namespace {

std::vector<GroupElement> c4_elements() {
  GroupSpec spec = GroupSpec::make(GroupKind::SO2);
  std::vector<GroupElement> out;
  for (int k = 0; k < 4; ++k)
    out.push_back(GroupElement::unchecked(spec, Mat(rot2d(k * kPi / 2.0))));
  return out;
}

// C4 rotations plus each composed with the mirror across the x-axis.
// Reflections leave GL2R+, so the table is carried in GL2C.
std::vector<GroupElement> d4_elements() {
  GroupSpec spec = GroupSpec::make(GroupKind::GL2C);
  Eigen::Matrix2d mirror;
  mirror << 1, 0, 0, -1;
  std::vector<GroupElement> out;
  for (int k = 0; k < 4; ++k) {
    Eigen::Matrix2d r = rot2d(k * kPi / 2.0);
    out.push_back(GroupElement::unchecked(spec, Mat(r).as_complex()));
    out.push_back(GroupElement::unchecked(spec, Mat((r * mirror).eval()).as_complex()));
  }
  return out;
}

bool contains_element(const std::vector<Eigen::Matrix3d>& set, const Eigen::Matrix3d& m) {
  for (const auto& e : set)
    if ((e - m).norm() < 1e-9) return true;
  return false;
}

/// Close a generating set under multiplication (all groups here are small).
std::vector<Eigen::Matrix3d> group_closure(std::vector<Eigen::Matrix3d> gens, int max_order) {
  std::vector<Eigen::Matrix3d> elems{Eigen::Matrix3d::Identity()};
  for (const auto& g : gens)
    if (!contains_element(elems, g)) elems.push_back(g);
  bool grew = true;
  while (grew) {
    grew = false;
    const size_t n = elems.size();
    for (size_t i = 0; i < n && !grew; ++i)
      for (size_t j = 0; j < n; ++j) {
        Eigen::Matrix3d p = elems[i] * elems[j];
        if (!contains_element(elems, p)) {
          elems.push_back(p);
          grew = true;
          if (static_cast<int>(elems.size()) > max_order)
            throw RangeError("group_closure: exceeded expected order");
          break;
        }
      }
  }
  return elems;
}

std::vector<GroupElement> tet_elements() {
  // Signed permutation matrices with det +1 and an even number of -1 signs:
  // the rotations preserving the tetrahedron on (1,1,1), (1,-1,-1),
  // (-1,1,-1), (-1,-1,1).
  GroupSpec spec = GroupSpec::make(GroupKind::SO3);
  std::vector<GroupElement> out;
  const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {1, 0, 2}, {2, 1, 0}};
  for (const auto& p : perms)
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          if (sx * sy * sz != 1) continue;  // even number of sign flips
          Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
          const int s[3] = {sx, sy, sz};
          for (int r = 0; r < 3; ++r) m(r, p[r]) = s[r];
          if (m.determinant() > 0.5) out.push_back(GroupElement::unchecked(spec, Mat(m)));
        }
  return out;
}

std::vector<GroupElement> oct_elements() {
  // All 24 signed permutation matrices with det +1.
  GroupSpec spec = GroupSpec::make(GroupKind::SO3);
  std::vector<GroupElement> out;
  const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {1, 0, 2}, {2, 1, 0}};
  for (const auto& p : perms)
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
          const int s[3] = {sx, sy, sz};
          for (int r = 0; r < 3; ++r) m(r, p[r]) = s[r];
          if (m.determinant() > 0.5) out.push_back(GroupElement::unchecked(spec, Mat(m)));
        }
  return out;
}

Eigen::Matrix3d axis_rotation(const Eigen::Vector3d& axis, double angle) {
  return rodrigues((angle * axis.normalized()).eval());
}

std::vector<GroupElement> ico_elements() {
  // Rotation group of the icosahedron with vertices at the cyclic
  // permutations of (0, +-1, +-phi): closure of a 5-fold vertex rotation
  // and the 2-fold rotation about z.
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Matrix3d> gens;
  gens.push_back(axis_rotation(Eigen::Vector3d(0, 1, phi), 2.0 * kPi / 5.0));
  gens.push_back(axis_rotation(Eigen::Vector3d(0, 0, 1), kPi));
  auto elems = group_closure(std::move(gens), 60);
  GroupSpec spec = GroupSpec::make(GroupKind::SO3);
  std::vector<GroupElement> out;
  out.reserve(elems.size());
  for (auto& m : elems) {
    // Snap the numerically closed products back onto exact rotations.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.push_back(GroupElement::unchecked(spec, Mat(Eigen::Matrix3d(svd.matrixU() * svd.matrixV().transpose()))));
  }
  return out;
}

}  // namespace

const DiscreteGroupTable& discrete_group(DiscreteGroupName name) {
  static const DiscreteGroupTable c4{DiscreteGroupName::C4, c4_elements(), 4};
  static const DiscreteGroupTable d4{DiscreteGroupName::D4, d4_elements(), 8};
  static const DiscreteGroupTable tet{DiscreteGroupName::Tet, tet_elements(), 12};
  static const DiscreteGroupTable oct{DiscreteGroupName::Oct, oct_elements(), 24};
  static const DiscreteGroupTable ico{DiscreteGroupName::Ico, ico_elements(), 60};
  static const DiscreteGroupTable so2z{DiscreteGroupName::SO2AroundZ, {}, 0, Eigen::Vector3d(0, 0, 1)};
  switch (name) {
    case DiscreteGroupName::C4: return c4;
    case DiscreteGroupName::D4: return d4;
    case DiscreteGroupName::Tet: return tet;
    case DiscreteGroupName::Oct: return oct;
    case DiscreteGroupName::Ico: return ico;
    case DiscreteGroupName::SO2AroundZ: return so2z;
  }
  throw ContractError("discrete_group: bad name");
}

const char* to_string(DiscreteGroupName n) {
  switch (n) {
    case DiscreteGroupName::C4: return "C4";
    case DiscreteGroupName::D4: return "D4";
    case DiscreteGroupName::Tet: return "Tet";
    case DiscreteGroupName::Oct: return "Oct";
    case DiscreteGroupName::Ico: return "Ico";
    case DiscreteGroupName::SO2AroundZ: return "SO2aroundZ";
  }
  return "?";
}

DiscreteGroupName discrete_group_from_string(const std::string& s) {
  if (s == "C4") return DiscreteGroupName::C4;
  if (s == "D4") return DiscreteGroupName::D4;
  if (s == "Tet") return DiscreteGroupName::Tet;
  if (s == "Oct") return DiscreteGroupName::Oct;
  if (s == "Ico") return DiscreteGroupName::Ico;
  if (s == "SO2aroundZ") return DiscreteGroupName::SO2AroundZ;
  throw ParseError("unknown discrete group: " + s);
}

GroupElement polar_rotation(const GroupElement& g) {
  if (g.spec.is_complex())
    throw ContractError("polar_rotation: complex matrices unsupported");
  const Eigen::MatrixXd& m = g.mat.re;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-10)
    throw SingularityError("polar_rotation: matrix is near singular");
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  Eigen::MatrixXd r = u * v.transpose();
  if (r.determinant() < 0) {
    // Nearest special-orthogonal matrix: flip the direction carrying the
    // smallest singular value (singular values are sorted decreasing).
    u.col(u.cols() - 1) *= -1.0;
    r = u * v.transpose();
  }
  GroupSpec so = GroupSpec::make(g.spec.matrix_dim == 2 ? GroupKind::SO2 : GroupKind::SO3);
  return GroupElement::unchecked(so, Mat(std::move(r)));
}

EulerAngles rotation_to_angles(const GroupElement& g) {
  EulerAngles e;
  if (g.spec.kind == GroupKind::SO2) {
    e.yaw = std::atan2(g.mat.re(1, 0), g.mat.re(0, 0));
    return e;
  }
  if (g.spec.kind != GroupKind::SO3)
    throw ContractError("rotation_to_angles: spec must be SO2 or SO3");
  const Eigen::MatrixXd& r = g.mat.re;
  double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  e.pitch = std::asin(sp);
  if (kPi / 2.0 - std::abs(e.pitch) < 1e-6) {
    // Gimbal lock: yaw and roll share an axis; put the whole twist in yaw.
    e.gimbal_lock = true;
    e.roll = 0.0;
    e.yaw = std::atan2(-r(0, 1), r(1, 1));
    return e;
  }
  e.yaw = std::atan2(r(1, 0), r(0, 0));
  e.roll = std::atan2(r(2, 1), r(2, 2));
  return e;
}

Eigen::Matrix3d euler_to_matrix(const EulerAngles& e) {
  Eigen::Matrix3d rz = rot_z(e.yaw);
  Eigen::Matrix3d ry;
  ry << std::cos(e.pitch), 0, std::sin(e.pitch), 0, 1, 0, -std::sin(e.pitch), 0, std::cos(e.pitch);
  Eigen::Matrix3d rx;
  rx << 1, 0, 0, 0, std::cos(e.roll), -std::sin(e.roll), 0, std::sin(e.roll), std::cos(e.roll);
  return rz * ry * rx;
}

std::pair<Eigen::Vector3d, double> rotation_axis_angle(const Eigen::Matrix3d& r) {
  // Shepperd-style quaternion extraction; stable at angle 0 and pi.
  double t = r.trace();
  double w, x, y, z;
  if (t > 0.0) {
    double s = std::sqrt(t + 1.0) * 2.0;
    w = 0.25 * s;
    x = (r(2, 1) - r(1, 2)) / s;
    y = (r(0, 2) - r(2, 0)) / s;
    z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    w = (r(2, 1) - r(1, 2)) / s;
    x = 0.25 * s;
    y = (r(0, 1) + r(1, 0)) / s;
    z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    w = (r(0, 2) - r(2, 0)) / s;
    x = (r(0, 1) + r(1, 0)) / s;
    y = 0.25 * s;
    z = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    w = (r(1, 0) - r(0, 1)) / s;
    x = (r(0, 2) + r(2, 0)) / s;
    y = (r(1, 2) + r(2, 1)) / s;
    z = 0.25 * s;
  }
  Eigen::Vector3d v(x, y, z);
  double vn = v.norm();
  double angle = 2.0 * std::atan2(vn, std::abs(w));
  if (vn < 1e-12) return {Eigen::Vector3d(0, 0, 1), 0.0};
  if (w < 0) v = -v;
  return {v / vn, angle};
}

std::pair<double, double> mollweide_project(double lon, double lat) {
  constexpr double kHalfPi = kPi / 2.0;
  double alpha;
  if (kHalfPi - std::abs(lat) < 1e-12) {
    alpha = std::copysign(kHalfPi, lat);  // Newton step degenerates at the poles
  } else {
    alpha = lat;
    for (int it = 0; it < 100; ++it) {
      double f = 2.0 * alpha + std::sin(2.0 * alpha) - kPi * std::sin(lat);
      double fp = 2.0 + 2.0 * std::cos(2.0 * alpha);
      double step = f / fp;
      alpha -= step;
      if (std::abs(step) < 1e-12) break;
    }
  }
  const double sqrt2 = std::sqrt(2.0);
  double u = (2.0 * sqrt2 / kPi) * lon * std::cos(alpha);
  double v = sqrt2 * std::sin(alpha);
  return {u, v};
}

GroupElement lift(const GroupElement& g, const GroupSpec& target) {
  if (g.spec == target) return g;
  if (g.spec.matrix_dim != target.matrix_dim)
    throw ContractError("lift: matrix dimensions differ");
  Mat m = g.mat;
  if (target.is_complex()) m = m.as_complex();
  return GroupElement::make(target, std::move(m));
}

}  // namespace lieflow
