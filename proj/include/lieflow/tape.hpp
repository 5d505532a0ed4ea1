#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lieflow/errors.hpp"

namespace lieflow {

double gelu_scalar(double x);
double gelu_grad_scalar(double x);

/// Reverse-mode tape over dense real matrices. Nodes are created through the
/// builder methods and refer to parents by index; backward() accumulates
/// gradients for every node on a path from a gradient-enabled leaf to the
/// scalar root.
class Tape {
 public:
  using Index = int;

  /// Leaf node. `needs_grad` enables gradient accumulation for it.
  Index input(Eigen::MatrixXd value, bool needs_grad);

  Index matmul(Index a, Index b);
  Index add(Index a, Index b);              // same shape
  Index add_rowvec(Index a, Index row);     // broadcast 1 x n over rows
  Index sub(Index a, Index b);
  Index scale(Index a, double s);
  Index gelu(Index a);
  Index sin(Index a);
  Index cos(Index a);
  Index concat_cols(Index a, Index b);
  Index reshape(Index a, Eigen::Index rows, Eigen::Index cols);
  Index sum_sq(Index a);                    // 1x1 result

  const Eigen::MatrixXd& value(Index i) const { return nodes_[static_cast<std::size_t>(i)].value; }
  /// Valid after backward(); zero matrix if the node was never reached.
  const Eigen::MatrixXd& gradient(Index i) const;

  /// root must be 1x1; seeds d(root)/d(root) = 1.
  void backward(Index root);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op { Input, MatMul, Add, AddRowVec, Sub, Scale, Gelu, Sin, Cos, ConcatCols, Reshape, SumSq };

  struct Node {
    Op op;
    Index a = -1, b = -1;
    double scalar = 0.0;
    Eigen::Index aux_rows = 0, aux_cols = 0;  // Reshape target / ConcatCols split
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    bool needs_grad = false;
  };

  Index push(Node n);
  Node& at(Index i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& at(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
  void accumulate(Index target, const Eigen::MatrixXd& g);

  std::vector<Node> nodes_;
  Eigen::MatrixXd zero_;
};

}  // namespace lieflow
