#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mgsim/scenario.hpp"
#include "mgsim/trace.hpp"

namespace mgsim {

constexpr double kUnavailable = std::numeric_limits<double>::quiet_NaN();

/// Per-DG steady-window statistics; NaN when the DG was disconnected or the
/// window is too short (< 0.15 s) for steady statistics.
struct DgWindowStats {
  double mean_v_err = kUnavailable;     // mean (v_od - v_ref) over steady samples
  double mean_abs_v_err = kUnavailable; // mean |v_od - v_ref|
  double max_abs_v_err = kUnavailable;  // max |v_od - v_ref| over steady samples
  double std_v = kUnavailable;          // std of v_od over steady samples
  double whole_max_abs_v_err = kUnavailable;  // over the entire window
  double rmse_x1 = kUnavailable;        // x_hat1 vs v_od, steady samples
  double rmse_x2 = kUnavailable;        // x_hat2 vs ground-truth dv_od
  double rmse_x3 = kUnavailable;        // x_hat3 vs ground-truth xi
  double rms_vdot = kUnavailable;       // signal RMS of ground-truth dv_od
  double rms_xi = kUnavailable;         // signal RMS of ground-truth xi
};

/// Metrics over one inter-event window [t_begin, t_end).
struct WindowMetrics {
  double t_begin = 0.0;
  double t_end = 0.0;
  bool stats_available = false;  // window long enough for steady statistics
  bool settled = false;
  double settling_time = kUnavailable;  // seconds after t_begin
  std::vector<DgWindowStats> dg;        // indexed by DG
  double sharing_dispersion = kUnavailable;  // mean of max_ij |nq_i Q_i - nq_j Q_j|
  double sharing_mean = kUnavailable;        // mean of mean_i nq_i Q_i
  int lyapunov_violations = 0;
  double reach_time = kUnavailable;  // first time all |s_i| < layer, after t_begin
  double max_abs_s_after_reach = kUnavailable;
};

struct Metrics {
  double v_ref = 0.0;
  double settle_band = 1.0;   // V
  double settle_hold = 0.1;   // s
  std::vector<WindowMetrics> windows;
  int covariance_resets = 0;

  std::string summary(const std::vector<std::string>& dg_names) const;
};

/// Windows are delimited by event timestamps. Steady statistics cover the
/// final 20% of each window; settling is the first instant after which every
/// connected DG remains within v_ref +/- 1 V for 0.1 s.
Metrics compute_metrics(const Trace& trace, const Scenario& scenario);

}  // namespace mgsim
