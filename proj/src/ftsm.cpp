#include "mgsim/ftsm.hpp"

#include <cmath>
#include <stdexcept>

namespace mgsim {

void FtsmParams::validate() const {
  auto odd_positive = [](int v, const char* name) {
    if (v <= 0 || v % 2 == 0)
      throw std::invalid_argument(std::string("ftsm params: ") + name +
                                  " must be a positive odd integer");
  };
  odd_positive(m, "m");
  odd_positive(n, "n");
  odd_positive(p, "p");
  odd_positive(q, "q");
  odd_positive(m1, "m1");
  odd_positive(n1, "n1");
  odd_positive(p1, "p1");
  odd_positive(q1, "q1");
  if (m <= n) throw std::invalid_argument("ftsm params: m > n required");
  if (p >= q) throw std::invalid_argument("ftsm params: p < q required");
  if (m1 <= n1) throw std::invalid_argument("ftsm params: m1 > n1 required");
  if (p1 >= q1) throw std::invalid_argument("ftsm params: p1 < q1 required");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw std::invalid_argument(std::string("ftsm params: ") + name +
                                  " must be positive");
  };
  positive(c, "c");
  positive(d, "d");
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(c_q, "c_q");
  positive(d_q, "d_q");
  if (boundary_layer < 0.0)
    throw std::invalid_argument("ftsm params: boundary_layer must be >= 0");
  if (!(epsilon_floor > 0.0))
    throw std::invalid_argument("ftsm params: epsilon_floor must be positive");
}

double spow(double x, double a) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? std::pow(x, a) : -std::pow(-x, a);
}

TrackingErrors tracking_errors(const CommGraph& graph, TradeoffMode mode, int self,
                               double y1, double y2, double nq_q,
                               const std::vector<NeighborMsg>& msgs,
                               const ReferenceSignal& ref) {
  TrackingErrors e;
  const bool use_lv = (mode == TradeoffMode::VoltageOnly);
  const bool use_bv = (mode != TradeoffMode::SharingOnly);
  const bool use_lq = (mode != TradeoffMode::VoltageOnly);

  for (int j : graph.neighbors(self)) {
    const NeighborMsg& msg = msgs[static_cast<size_t>(j)];
    if (msg.stale) continue;  // dropped neighbor: a_ij treated as zero
    const double a = graph.weight(self, j);
    e.d_eff += a;
    e.sum_a_z += a * msg.z;
    if (use_lv) {
      e.e1 += a * (y1 - msg.y1_hat);
      e.e2 += a * (y2 - msg.y2_hat);
    }
    if (use_lq) e.e_q += a * (nq_q - msg.nq_times_q);
  }
  const double b = graph.pin_gain(self);
  e.d_eff += b;
  if (use_bv) {
    e.e1 += b * (y1 - ref.y0);
    e.e2 += b * (y2 - ref.y0_dot);
  }
  return e;
}

double ftsm_surface(const FtsmParams& pr, double e1, double e2) {
  const double mn = static_cast<double>(pr.m) / pr.n;
  const double pq = static_cast<double>(pr.p) / pr.q;
  return e2 + pr.c * spow(e1, mn) + pr.d * spow(e1, pq);
}

double tradeoff_surface(const FtsmParams& pr, double e1, double e2, double e_q) {
  const double m1n1 = static_cast<double>(pr.m1) / pr.n1;
  const double p1q1 = static_cast<double>(pr.p1) / pr.q1;
  return ftsm_surface(pr, e1, e2) + pr.c_q * spow(e_q, m1n1) + pr.d_q * spow(e_q, p1q1);
}

namespace {

inline double sat_sgn(double s, double layer) {
  if (layer > 0.0 && std::abs(s) < layer) return s / layer;
  return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
}

}  // namespace

double ftsm_law(const FtsmParams& pr, double s, double e1, double e2,
                double sum_a_z, double d_eff) {
  const double mn = static_cast<double>(pr.m) / pr.n;
  const double pq = static_cast<double>(pr.p) / pr.q;
  const double mag = std::max(std::abs(e1), pr.epsilon_floor);
  const double bracket =
      pr.c * mn * std::pow(mag, mn - 1.0) + pr.d * pq * std::pow(mag, pq - 1.0);
  const double reach = pr.alpha * s * std::abs(s) + pr.beta * sat_sgn(s, pr.boundary_layer);
  return (sum_a_z - reach - bracket * e2) / d_eff;
}

double baseline_law(double k1, double k2, double e1, double e2,
                    double sum_a_z, double d_eff) {
  return (sum_a_z - k1 * e1 - k2 * e2) / d_eff;
}

double lyapunov_diag(const std::vector<double>& surfaces) {
  double v = 0.0;
  for (double s : surfaces) v += 0.5 * s * s;
  return v;
}

}  // namespace mgsim
