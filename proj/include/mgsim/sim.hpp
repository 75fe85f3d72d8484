#pragma once

#include <random>
#include <string>
#include <vector>

#include "mgsim/eskbf.hpp"
#include "mgsim/metrics.hpp"
#include "mgsim/scenario.hpp"
#include "mgsim/trace.hpp"

namespace mgsim {

/// Coupled plant: all DG states followed by network branch currents.
/// Layout: DG i occupies [13*i, 13*i+13); then per-line and per-load DQ pairs.
class PlantModel {
 public:
  explicit PlantModel(const Scenario& scenario);

  int state_count() const { return 13 * n_dg_ + 2 * (n_lines_ + n_loads_); }
  int dg_offset(int i) const { return 13 * i; }
  int net_offset() const { return 13 * n_dg_; }
  std::vector<std::string> state_names() const;

  /// Full coupled right-hand side; `u` holds one V_n command per DG.
  void derivative(const double* x, const double* u, double* dx);

  /// Leader droop frequency (with fallback); `source` reports the DG used.
  double omega_com(const double* x, int& source) const;

  /// Bus voltage at DG i's bus, rotated into its local frame.
  void local_bus_voltage(const double* x, int i, double& v_bd, double& v_bq);

  /// Bus voltage at DG i's bus in the common frame (synchro-close support).
  void bus_voltage_common(const double* x, int i, double& v_d, double& v_q);

  /// Power-balance residual at the current state, relative to load power.
  double power_residual_rel(const double* x);

  NetworkModel net;                     // breakers/scales mutated by events
  std::vector<DGParams> plant_params;   // perturbed plant-side parameters
  std::vector<DGParams> nominal_params; // controller/observer-side parameters
  int leader = 0;

 private:
  void resolve_buses(const double* x);

  int n_dg_ = 0, n_lines_ = 0, n_loads_ = 0;
  // scratch (single-threaded per run)
  std::vector<double> inj_, vbus_d_, vbus_q_, omega_;
};

struct LieProbeSample {
  double t = 0.0;
  int dg = 0;
  double fd_value = 0.0;      // central finite difference of dv_od/dt
  double oracle_value = 0.0;  // L_F^2 h + L_g L_F h * u
};

struct RunDiagnostics {
  std::vector<std::pair<double, std::string>> log;  // applied events, warnings
  int covariance_resets = 0;
  int leader_switches = 0;
  double min_p_eig = 0.0;  // smallest observer covariance eigenvalue seen
  bool blew_up = false;
  double blowup_time = 0.0;
  std::string blowup_what;
  std::vector<double> power_residual_rel;  // sampled once per control period
  std::vector<LieProbeSample> lie_probe;
};

struct RunResult {
  Trace trace;
  Metrics metrics;
  RunDiagnostics diag;
  int exit_code = 0;  // 0 ok, 2 numerical blowup
};

class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  /// Enables the sub-period finite-difference probe of d2v_od/dt2.
  void enable_lie_probe(bool on = true) { lie_probe_ = on; }

  RunResult run();

  const Scenario& scenario() const { return scenario_; }
  PlantModel& plant() { return plant_; }

 private:
  Scenario scenario_;
  PlantModel plant_;
  bool lie_probe_ = false;
};

RunResult run(const Scenario& scenario);

struct SweepPoint {
  double variance = 0.0;
  Metrics with_observer;
  Metrics without_observer;
};

/// Runs the scenario per variance with and without the observer path.
std::vector<SweepPoint> run_noise_sweep(const Scenario& scenario,
                                        const std::vector<double>& variances);

}  // namespace mgsim
