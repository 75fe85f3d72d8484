#pragma once

#include <vector>

#include "mgsim/comm_graph.hpp"

namespace mgsim {

/// Surface and reaching-law constants, plus the trade-off counterparts.
/// m, n, p, q are positive odd integers with m > n and p < q.
struct FtsmParams {
  double c = 600.0, d = 100.0;
  int m = 13, n = 11, p = 3, q = 5;
  double alpha = 100.0, beta = 400.0;
  double boundary_layer = 1.0;   // sgn smoothing width (surface units); 0 = pure law
  double epsilon_floor = 1e-6;   // |e1| floor for the singular p/q-1 exponent
  double c_q = 100.0, d_q = 40.0;
  int m1 = 13, n1 = 11, p1 = 3, q1 = 5;

  void validate() const;  // throws on violated oddness/ordering/positivity
};

/// Values a DG publishes to its neighbors once per control period.
struct NeighborMsg {
  int sender = -1;
  double y1_hat = 0.0;      // V
  double y2_hat = 0.0;      // V/s
  double z = 0.0;           // V/s^2
  double nq_times_q = 0.0;  // V, for the trade-off mode
  bool stale = true;        // breaker open or nothing received this period
  double timestamp = 0.0;   // s
};

struct ReferenceSignal {
  double y0 = 0.0;      // v_ref (V)
  double y0_dot = 0.0;  // always 0
};

/// sig(x)^a = sgn(x) |x|^a; odd in x, fixed point at 0.
double spow(double x, double a);

/// Local neighborhood tracking errors (Eq.-(25) form). Stale senders are
/// dropped from the sums (their a_ij treated as zero).
///   e1 = sum_j a_ij (y1_i - y1_j) + b_i (y1_i - y0)
///   e2 = sum_j a_ij (y2_i - y2_j) + b_i y2_i
/// In trade-off modes the split replaces (L, B) by (L_V, B_V).
struct TrackingErrors {
  double e1 = 0.0;
  double e2 = 0.0;
  double e_q = 0.0;       // sum_j a_ij (nq_i Q_i - nq_j Q_j), full L_Q
  double d_eff = 0.0;     // effective sum_j a_ij + b_i after staleness masking
  double sum_a_z = 0.0;   // effective sum_j a_ij z_j
};

TrackingErrors tracking_errors(const CommGraph& graph, TradeoffMode mode, int self,
                               double y1, double y2, double nq_q,
                               const std::vector<NeighborMsg>& msgs,
                               const ReferenceSignal& ref);

/// s = e2 + c sig(e1)^{m/n} + d sig(e1)^{p/q}.
double ftsm_surface(const FtsmParams& params, double e1, double e2);

/// Trade-off surface: adds c_q sig(e_q)^{m1/n1} + d_q sig(e_q)^{p1/q1}.
double tradeoff_surface(const FtsmParams& params, double e1, double e2, double e_q);

/// Discontinuous consensus law producing the virtual command z_i.
/// With boundary_layer == 0 this matches the printed law pointwise away from
/// s = 0, e1 = 0; the epsilon floor regularizes the e1^{p/q-1} singularity.
double ftsm_law(const FtsmParams& params, double s, double e1, double e2,
                double sum_a_z, double d_eff);

/// Linear cooperative comparator: z = (d_eff)^-1 [sum a_ij z_j - k1 e1 - k2 e2].
double baseline_law(double k1, double k2, double e1, double e2,
                    double sum_a_z, double d_eff);

/// V = 1/2 sum s_i^2.
double lyapunov_diag(const std::vector<double>& surfaces);

}  // namespace mgsim
