#include "lieflow/tape.hpp"

#include <cmath>

namespace lieflow {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad_scalar(double x) {
  double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  return phi + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Tape::Index Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Index>(nodes_.size() - 1);
}

Tape::Index Tape::input(Eigen::MatrixXd value, bool needs_grad) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::matmul(Index a, Index b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.cols() != nb.value.rows()) throw ContractError("tape matmul: shape mismatch");
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.value.noalias() = na.value * nb.value;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::add(Index a, Index b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    throw ContractError("tape add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.value = na.value + nb.value;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::add_rowvec(Index a, Index row) {
  const Node& na = at(a);
  const Node& nr = at(row);
  if (nr.value.rows() != 1 || nr.value.cols() != na.value.cols())
    throw ContractError("tape add_rowvec: bias shape mismatch");
  Node n;
  n.op = Op::AddRowVec;
  n.a = a;
  n.b = row;
  n.value = na.value.rowwise() + nr.value.row(0);
  n.needs_grad = na.needs_grad || nr.needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::sub(Index a, Index b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    throw ContractError("tape sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.value = na.value - nb.value;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::scale(Index a, double s) {
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.scalar = s;
  n.value = s * at(a).value;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::gelu(Index a) {
  Node n;
  n.op = Op::Gelu;
  n.a = a;
  n.value = at(a).value.unaryExpr([](double x) { return gelu_scalar(x); });
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::sin(Index a) {
  Node n;
  n.op = Op::Sin;
  n.a = a;
  n.value = at(a).value.array().sin();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::cos(Index a) {
  Node n;
  n.op = Op::Cos;
  n.a = a;
  n.value = at(a).value.array().cos();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::concat_cols(Index a, Index b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.rows() != nb.value.rows()) throw ContractError("tape concat_cols: row mismatch");
  Node n;
  n.op = Op::ConcatCols;
  n.a = a;
  n.b = b;
  n.aux_cols = na.value.cols();
  n.value.resize(na.value.rows(), na.value.cols() + nb.value.cols());
  n.value << na.value, nb.value;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::reshape(Index a, Eigen::Index rows, Eigen::Index cols) {
  const Node& na = at(a);
  if (na.value.size() != rows * cols) throw ContractError("tape reshape: size mismatch");
  Node n;
  n.op = Op::Reshape;
  n.a = a;
  n.aux_rows = na.value.rows();
  n.aux_cols = na.value.cols();
  n.value = Eigen::Map<const Eigen::MatrixXd>(na.value.data(), rows, cols);
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

Tape::Index Tape::sum_sq(Index a) {
  Node n;
  n.op = Op::SumSq;
  n.a = a;
  n.value = Eigen::MatrixXd::Constant(1, 1, at(a).value.squaredNorm());
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

const Eigen::MatrixXd& Tape::gradient(Index i) const {
  const Node& n = at(i);
  if (n.grad.size() == 0) {
    // Never touched by backward: report a zero gradient of the right shape.
    const_cast<Tape*>(this)->zero_ = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
    return zero_;
  }
  return n.grad;
}

void Tape::accumulate(Index target, const Eigen::MatrixXd& g) {
  Node& t = at(target);
  if (!t.needs_grad) return;
  if (t.grad.size() == 0)
    t.grad = g;
  else
    t.grad += g;
}

void Tape::backward(Index root) {
  Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw ContractError("tape backward: root must be scalar");
  if (!r.needs_grad) return;
  r.grad = Eigen::MatrixXd::Constant(1, 1, 1.0);
  for (Index i = root; i >= 0; --i) {
    Node& n = at(i);
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Eigen::MatrixXd& g = n.grad;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::MatMul:
        if (at(n.a).needs_grad) accumulate(n.a, g * at(n.b).value.transpose());
        if (at(n.b).needs_grad) accumulate(n.b, at(n.a).value.transpose() * g);
        break;
      case Op::Add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::AddRowVec:
        accumulate(n.a, g);
        if (at(n.b).needs_grad) accumulate(n.b, g.colwise().sum());
        break;
      case Op::Sub:
        accumulate(n.a, g);
        if (at(n.b).needs_grad) accumulate(n.b, (-g).eval());
        break;
      case Op::Scale:
        accumulate(n.a, (n.scalar * g).eval());
        break;
      case Op::Gelu:
        accumulate(n.a, (g.array() * at(n.a).value.unaryExpr([](double x) {
                                          return gelu_grad_scalar(x);
                                        }).array())
                            .matrix());
        break;
      case Op::Sin:
        accumulate(n.a, (g.array() * at(n.a).value.array().cos()).matrix());
        break;
      case Op::Cos:
        accumulate(n.a, (-g.array() * at(n.a).value.array().sin()).matrix());
        break;
      case Op::ConcatCols:
        accumulate(n.a, g.leftCols(n.aux_cols));
        if (at(n.b).needs_grad) accumulate(n.b, g.rightCols(g.cols() - n.aux_cols));
        break;
      case Op::Reshape:
        accumulate(n.a, Eigen::Map<const Eigen::MatrixXd>(g.data(), n.aux_rows, n.aux_cols));
        break;
      case Op::SumSq:
        accumulate(n.a, (2.0 * g(0, 0) * at(n.a).value).eval());
        break;
    }
  }
}

}  // namespace lieflow
