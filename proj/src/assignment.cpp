#include "lieflow/assignment.hpp"

#include <limits>

#include "lieflow/errors.hpp"

namespace lieflow {

double linear_assignment_cost(const Eigen::MatrixXd& cost, std::vector<int>* row_to_col) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n == 0) throw ContractError("linear_assignment: square matrix required");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n, 0.0), v(n, 0.0);
  std::vector<int> col4row(n, -1), row4col(n, -1);
  std::vector<double> shortest(n);
  std::vector<int> path(n);
  std::vector<char> in_sr(n), in_sc(n);
  std::vector<int> sr;

  for (int cur = 0; cur < n; ++cur) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(path.begin(), path.end(), -1);
    std::fill(in_sr.begin(), in_sr.end(), 0);
    std::fill(in_sc.begin(), in_sc.end(), 0);
    sr.clear();

    int sink = -1;
    double min_val = 0.0;
    int i = cur;
    while (sink == -1) {
      in_sr[i] = 1;
      sr.push_back(i);
      int index = -1;
      double lowest = kInf;
      for (int j = 0; j < n; ++j) {
        if (in_sc[j]) continue;
        double r = min_val + cost(i, j) - u[i] - v[j];
        if (r < shortest[j]) {
          shortest[j] = r;
          path[j] = i;
        }
        // Prefer unassigned columns on ties so the path terminates sooner.
        if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == -1)) {
          lowest = shortest[j];
          index = j;
        }
      }
      if (index == -1 || lowest == kInf)
        throw ContractError("linear_assignment: infeasible cost matrix");
      min_val = lowest;
      in_sc[index] = 1;
      if (row4col[index] == -1)
        sink = index;
      else
        i = row4col[index];
    }

    u[cur] += min_val;
    for (int r : sr)
      if (r != cur) u[r] += min_val - shortest[col4row[r]];
    for (int j = 0; j < n; ++j)
      if (in_sc[j]) v[j] -= min_val - shortest[j];

    int j = sink;
    for (;;) {
      int r = path[j];
      row4col[j] = r;
      int prev = col4row[r];
      col4row[r] = j;
      if (r == cur) break;
      j = prev;
    }
  }

  double total = 0.0;
  for (int r = 0; r < n; ++r) total += cost(r, col4row[r]);
  if (row_to_col) *row_to_col = col4row;
  return total;
}

}  // namespace lieflow
