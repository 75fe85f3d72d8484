#pragma once

#include <string>
#include <vector>

namespace mgsim {

struct LineBranch {
  std::string name;
  int from_bus = -1;
  int to_bus = -1;
  double r = 0.0;  // ohm
  double l = 0.0;  // H
};

struct LoadBranch {
  std::string name;
  int bus = -1;
  double r = 0.0;   // ohm
  double l = 0.0;   // H
  bool connected = true;
  double scale = 1.0;  // power scale factor; R_eff = r/scale, L_eff = l/scale
};

struct DgAttachment {
  int bus = -1;
  bool breaker_closed = true;
};

/// Electrical coupling between DGs: buses, RL lines, RL loads, breakers,
/// and the virtual-resistor bus-voltage resolution.
struct NetworkModel {
  std::vector<std::string> bus_names;
  std::vector<LineBranch> lines;
  std::vector<LoadBranch> loads;
  std::vector<DgAttachment> dg_attachments;  // index = DG index
  double r_virtual = 1000.0;                 // ohm

  int bus_count() const { return static_cast<int>(bus_names.size()); }
  int bus_index(const std::string& name) const;  // -1 if unknown
  /// Throws std::invalid_argument on inconsistent wiring.
  void validate() const;

  double load_r_eff(int m) const { return loads[m].r / loads[m].scale; }
  double load_l_eff(int m) const { return loads[m].l / loads[m].scale; }
};

/// Branch-current state layout: lines first, then loads, one DQ pair each,
/// all in the common rotating frame.
struct NetworkStateView {
  double* x = nullptr;  // 2*(lines+loads) entries
  int n_lines = 0;
  int n_loads = 0;

  double& line_d(int k) { return x[2 * k]; }
  double& line_q(int k) { return x[2 * k + 1]; }
  double& load_d(int m) { return x[2 * (n_lines + m)]; }
  double& load_q(int m) { return x[2 * (n_lines + m) + 1]; }
  double line_d(int k) const { return x[2 * k]; }
  double line_q(int k) const { return x[2 * k + 1]; }
  double load_d(int m) const { return x[2 * (n_lines + m)]; }
  double load_q(int m) const { return x[2 * (n_lines + m) + 1]; }
};

/// v_bus = r_virtual * (injected - drawn) per axis in the common frame.
/// dg_inj holds per-DG injected currents (D,Q pairs) already rotated to the
/// common frame, zeroed for open breakers. Output arrays sized bus_count.
void bus_voltages(const NetworkModel& net, const double* net_x,
                  const double* dg_inj, double* v_bus_d, double* v_bus_q);

/// RL branch dynamics with omega_com cross coupling. Disconnected loads hold
/// zero current and zero derivative.
void network_derivative(const NetworkModel& net, const double* net_x,
                        const double* v_bus_d, const double* v_bus_q,
                        double omega_com, double* dnet_x);

/// Toggle a load breaker by name / a DG breaker by index. Idempotent.
void set_breaker(NetworkModel& net, const std::string& target, bool closed);
void set_dg_breaker(NetworkModel& net, int dg_index, bool closed);

/// Leader convention: omega_com is the leader DG's instantaneous droop
/// frequency; falls back to the lowest-index connected DG when the leader
/// breaker is open. Returns the index actually used via `source`.
double common_frequency(const std::vector<double>& dg_omegas,
                        const NetworkModel& net, int leader, int& source);

}  // namespace mgsim
