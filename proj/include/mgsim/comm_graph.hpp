#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mgsim {

/// Trade-off between exact voltage regulation and reactive power sharing.
enum class TradeoffMode {
  VoltageOnly,               // L_V = L, B_V = diag(b), L_Q = 0
  SharingOnly,               // L_V = 0, B_V = 0,       L_Q = L
  SharingWithTightRegulation // L_V = 0, B_V = diag(b), L_Q = L
};

TradeoffMode parse_tradeoff_mode(const std::string& tag);
std::string to_string(TradeoffMode mode);

struct TradeoffGraphSplit {
  Eigen::MatrixXd laplacian_v; // L_V
  Eigen::MatrixXd pinning_v;   // B_V (diagonal)
  Eigen::MatrixXd laplacian_q; // L_Q
};

/// Weighted digraph among DG nodes plus leader pinning gains.
/// a(i,j) > 0 means node i receives information from node j.
/// Immutable after construction; construction validates all invariants:
///   a_ii = 0, a_ij >= 0, b_i >= 0, at least one b_i > 0,
///   every node reachable from a pinned node, d_i + b_i > 0.
class CommGraph {
 public:
  CommGraph(Eigen::MatrixXd adjacency, Eigen::VectorXd pinning);

  int size() const { return n_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const Eigen::VectorXd& pinning() const { return pinning_; }

  double weight(int i, int j) const { return adjacency_(i, j); }
  double pin_gain(int i) const { return pinning_(i); }
  /// In-degree d_i = sum_j a_ij.
  double in_degree(int i) const { return in_degree_(i); }
  /// Neighbor set N_i = { j : a_ij > 0 }.
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  /// Lowest-index pinned node; used as the frequency leader by default.
  int first_pinned() const;

 private:
  int n_;
  Eigen::MatrixXd adjacency_;
  Eigen::VectorXd pinning_;
  Eigen::VectorXd in_degree_;
  std::vector<std::vector<int>> neighbors_;
};

/// Convenience builder: undirected unit-weight edges over n nodes.
CommGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges,
                     const std::vector<int>& pinned);

/// L = D - A. Rows sum to zero.
Eigen::MatrixXd build_laplacian(const CommGraph& graph);

/// L-bar = L + diag(b). Nonsingular for any graph passing construction.
Eigen::MatrixXd augmented_laplacian(const CommGraph& graph);

TradeoffGraphSplit split_for_tradeoff(const CommGraph& graph, TradeoffMode mode);

}  // namespace mgsim
