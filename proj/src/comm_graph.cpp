#include "mgsim/comm_graph.hpp"

#include <deque>
#include <stdexcept>

namespace mgsim {

TradeoffMode parse_tradeoff_mode(const std::string& tag) {
  if (tag == "voltage-only") return TradeoffMode::VoltageOnly;
  if (tag == "sharing-only") return TradeoffMode::SharingOnly;
  if (tag == "sharing-with-tight-regulation")
    return TradeoffMode::SharingWithTightRegulation;
  throw std::invalid_argument("unknown tradeoff mode: '" + tag + "'");
}

std::string to_string(TradeoffMode mode) {
  switch (mode) {
    case TradeoffMode::VoltageOnly: return "voltage-only";
    case TradeoffMode::SharingOnly: return "sharing-only";
    case TradeoffMode::SharingWithTightRegulation:
      return "sharing-with-tight-regulation";
  }
  return "?";
}

CommGraph::CommGraph(Eigen::MatrixXd adjacency, Eigen::VectorXd pinning)
    : n_(static_cast<int>(adjacency.rows())),
      adjacency_(std::move(adjacency)),
      pinning_(std::move(pinning)) {
  if (n_ < 1 || adjacency_.cols() != n_)
    throw std::invalid_argument("comm graph: adjacency must be square and non-empty");
  if (pinning_.size() != n_)
    throw std::invalid_argument("comm graph: pinning vector size " +
                                std::to_string(pinning_.size()) +
                                " does not match node count " + std::to_string(n_));

  for (int i = 0; i < n_; ++i) {
    if (adjacency_(i, i) != 0.0)
      throw std::invalid_argument("comm graph: a_ii must be zero (node " +
                                  std::to_string(i) + ")");
    if (pinning_(i) < 0.0)
      throw std::invalid_argument("comm graph: pinning gain b_i must be nonnegative (node " +
                                  std::to_string(i) + ")");
    for (int j = 0; j < n_; ++j)
      if (adjacency_(i, j) < 0.0)
        throw std::invalid_argument("comm graph: edge weight a_ij must be nonnegative (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
  }

  if (pinning_.maxCoeff() <= 0.0)
    throw std::invalid_argument("comm graph: no pinned node (all b_i are zero)");

  in_degree_ = adjacency_.rowwise().sum();
  for (int i = 0; i < n_; ++i)
    if (in_degree_(i) + pinning_(i) <= 0.0)
      throw std::invalid_argument("comm graph: d_i + b_i must be positive (node " +
                                  std::to_string(i) + " has no neighbors and no pin)");

  // Reachability: information flows j -> i whenever a_ij > 0; every node must
  // be reachable from some pinned node.
  std::vector<char> reached(n_, 0);
  std::deque<int> frontier;
  for (int i = 0; i < n_; ++i)
    if (pinning_(i) > 0.0) {
      reached[i] = 1;
      frontier.push_back(i);
    }
  while (!frontier.empty()) {
    int j = frontier.front();
    frontier.pop_front();
    for (int i = 0; i < n_; ++i)
      if (!reached[i] && adjacency_(i, j) > 0.0) {
        reached[i] = 1;
        frontier.push_back(i);
      }
  }
  for (int i = 0; i < n_; ++i)
    if (!reached[i])
      throw std::invalid_argument("comm graph: node " + std::to_string(i) +
                                  " is not reachable from any pinned node");

  neighbors_.resize(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (adjacency_(i, j) > 0.0) neighbors_[i].push_back(j);
}

int CommGraph::first_pinned() const {
  for (int i = 0; i < n_; ++i)
    if (pinning_(i) > 0.0) return i;
  return 0;  // unreachable: construction guarantees a pinned node
}

CommGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges,
                     const std::vector<int>& pinned) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i : pinned) b(i) = 1.0;
  return CommGraph(std::move(a), std::move(b));
}

Eigen::MatrixXd build_laplacian(const CommGraph& graph) {
  Eigen::MatrixXd l = -graph.adjacency();
  for (int i = 0; i < graph.size(); ++i) l(i, i) = graph.in_degree(i);
  return l;
}

Eigen::MatrixXd augmented_laplacian(const CommGraph& graph) {
  Eigen::MatrixXd lbar = build_laplacian(graph);
  lbar.diagonal() += graph.pinning();
  return lbar;
}

TradeoffGraphSplit split_for_tradeoff(const CommGraph& graph, TradeoffMode mode) {
  const int n = graph.size();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd l = build_laplacian(graph);
  const Eigen::MatrixXd b = graph.pinning().asDiagonal();
  switch (mode) {
    case TradeoffMode::VoltageOnly: return {l, b, zero};
    case TradeoffMode::SharingOnly: return {zero, zero, l};
    case TradeoffMode::SharingWithTightRegulation: return {zero, b, l};
  }
  throw std::invalid_argument("unknown tradeoff mode tag");
}

}  // namespace mgsim
