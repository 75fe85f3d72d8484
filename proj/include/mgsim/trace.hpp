#pragma once

#include <string>
#include <vector>

namespace mgsim {

/// One per-DG slice of a trace row.
struct DgTraceSlice {
  double v_od = 0.0;
  double v_oq = 0.0;
  double p = 0.0;
  double q = 0.0;
  double u = 0.0;        // applied V_n command
  double s = 0.0;        // sliding surface
  double e1 = 0.0;
  double e2 = 0.0;
  double x_hat1 = 0.0;
  double x_hat2 = 0.0;
  double x_hat3 = 0.0;
  double p11 = 0.0, p22 = 0.0, p33 = 0.0;  // covariance diagonal
  double innovation = 0.0;
  double vdot_true = 0.0;  // ground-truth dv_od/dt
  double xi_true = 0.0;    // ground-truth extended state
  bool saturated = false;
  bool connected = true;
};

/// One record per control period.
struct TraceRecord {
  double t = 0.0;
  std::vector<DgTraceSlice> dg;
  double lyapunov = 0.0;
  double omega_com = 0.0;
};

struct Trace {
  std::vector<std::string> dg_names;
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  size_t size() const { return records.size(); }
};

/// Fixed documented header, 9 significant digits per value.
void export_csv(const Trace& trace, const std::string& path);

}  // namespace mgsim
