#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lieflow {

/// Exact minimum-cost perfect matching on a square dense cost matrix by the
/// shortest-augmenting-path method with dual potentials (O(n^3)).
/// Returns the optimal total cost; row_to_col receives the assignment when
/// non-null. Ties are broken by column index, so results are deterministic.
double linear_assignment_cost(const Eigen::MatrixXd& cost, std::vector<int>* row_to_col = nullptr);

}  // namespace lieflow
