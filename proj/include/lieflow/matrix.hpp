#pragma once

#include <Eigen/Dense>
#include <complex>

#include "lieflow/errors.hpp"

namespace lieflow {

/// Small dense square matrix over R or C. Complex values are stored as a
/// pair of real matrices (re, im); a real matrix has an empty `im`. All
/// complex arithmetic is carried out on this pair representation.
struct Mat {
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;

  Mat() = default;
  explicit Mat(Eigen::MatrixXd r) : re(std::move(r)) {}
  Mat(Eigen::MatrixXd r, Eigen::MatrixXd i) : re(std::move(r)), im(std::move(i)) {}

  bool is_complex() const { return im.size() > 0; }
  Eigen::Index rows() const { return re.rows(); }
  Eigen::Index cols() const { return re.cols(); }

  static Mat identity(Eigen::Index n, bool complex_field = false) {
    Mat m(Eigen::MatrixXd::Identity(n, n));
    if (complex_field) m.im = Eigen::MatrixXd::Zero(n, n);
    return m;
  }
  static Mat zero(Eigen::Index n, bool complex_field = false) {
    Mat m(Eigen::MatrixXd::Zero(n, n));
    if (complex_field) m.im = Eigen::MatrixXd::Zero(n, n);
    return m;
  }

  /// Promote to an explicit (re, im) pair.
  Mat as_complex() const {
    if (is_complex()) return *this;
    return Mat(re, Eigen::MatrixXd::Zero(re.rows(), re.cols()));
  }

  double frobenius() const {
    double s = re.squaredNorm();
    if (is_complex()) s += im.squaredNorm();
    return std::sqrt(s);
  }

  Mat transpose() const {
    if (!is_complex()) return Mat(re.transpose());
    return Mat(re.transpose(), im.transpose());
  }

  Mat conj() const {
    if (!is_complex()) return *this;
    return Mat(re, -im);
  }

  std::complex<double> at(Eigen::Index r, Eigen::Index c) const {
    return {re(r, c), is_complex() ? im(r, c) : 0.0};
  }

  std::complex<double> trace() const {
    return {re.trace(), is_complex() ? im.trace() : 0.0};
  }

  friend Mat operator+(const Mat& a, const Mat& b) {
    if (!a.is_complex() && !b.is_complex()) return Mat(a.re + b.re);
    Mat ac = a.as_complex(), bc = b.as_complex();
    return Mat(ac.re + bc.re, ac.im + bc.im);
  }
  friend Mat operator-(const Mat& a, const Mat& b) {
    if (!a.is_complex() && !b.is_complex()) return Mat(a.re - b.re);
    Mat ac = a.as_complex(), bc = b.as_complex();
    return Mat(ac.re - bc.re, ac.im - bc.im);
  }
  friend Mat operator*(double s, const Mat& a) {
    if (!a.is_complex()) return Mat(s * a.re);
    return Mat(s * a.re, s * a.im);
  }
  /// (A_re + i A_im)(B_re + i B_im) = (AB - A'B') + i(AB' + A'B)
  friend Mat operator*(const Mat& a, const Mat& b) {
    if (!a.is_complex() && !b.is_complex()) return Mat(a.re * b.re);
    Mat ac = a.as_complex(), bc = b.as_complex();
    return Mat(ac.re * bc.re - ac.im * bc.im, ac.re * bc.im + ac.im * bc.re);
  }

  friend Mat operator*(const std::complex<double>& s, const Mat& a) {
    Mat ac = a.as_complex();
    return Mat(s.real() * ac.re - s.imag() * ac.im, s.real() * ac.im + s.imag() * ac.re);
  }
};

inline double frobenius_distance(const Mat& a, const Mat& b) { return (a - b).frobenius(); }

/// Determinant; supports 2x2 and 3x3 (3x3 only for real matrices).
inline std::complex<double> det(const Mat& m) {
  const Eigen::Index n = m.rows();
  if (n == 2) return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
  if (n == 3 && !m.is_complex()) return {m.re.determinant(), 0.0};
  throw ContractError("det: unsupported matrix shape");
}

/// Inverse of a 2x2 or real 3x3 matrix.
inline Mat inverse(const Mat& m) {
  const Eigen::Index n = m.rows();
  if (n == 3 && !m.is_complex()) {
    if (std::abs(m.re.determinant()) < 1e-300)
      throw SingularityError("inverse: singular 3x3 matrix");
    return Mat(m.re.inverse().eval());
  }
  if (n != 2) throw ContractError("inverse: unsupported matrix shape");
  std::complex<double> d = det(m);
  if (std::abs(d) < 1e-300) throw SingularityError("inverse: singular 2x2 matrix");
  std::complex<double> s = 1.0 / d;
  if (!m.is_complex() && std::abs(s.imag()) == 0.0) {
    Eigen::MatrixXd adj(2, 2);
    adj << m.re(1, 1), -m.re(0, 1), -m.re(1, 0), m.re(0, 0);
    return Mat(s.real() * adj);
  }
  Mat mc = m.as_complex();
  Mat adj(Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 2));
  adj.re << mc.re(1, 1), -mc.re(0, 1), -mc.re(1, 0), mc.re(0, 0);
  adj.im << mc.im(1, 1), -mc.im(0, 1), -mc.im(1, 0), mc.im(0, 0);
  return s * adj;
}

/// Eigenvalues of a 2x2 (possibly complex) matrix by the quadratic formula.
inline std::pair<std::complex<double>, std::complex<double>> eigenvalues2(const Mat& m) {
  std::complex<double> tr = m.trace();
  std::complex<double> d = det(m);
  std::complex<double> disc = std::sqrt(tr * tr - 4.0 * d);
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

}  // namespace lieflow
