#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/comm_graph.hpp"
#include "mgsim/dg_plant.hpp"
#include "mgsim/ftsm.hpp"
#include "mgsim/network.hpp"

namespace mgsim {

enum class EventKind {
  ActivateSecondary,
  DeactivateSecondary,
  LoadConnect,
  LoadDisconnect,
  LoadScale,
  DgDisconnect,
  DgReconnect,
  SetNoiseVariance
};

const char* to_string(EventKind kind);

struct Event {
  double time = 0.0;
  EventKind kind{};
  std::string target;   // load name or dg name where applicable
  double value = 0.0;   // load-scale factor / noise variance
};

enum class ControllerLaw { Ftsm, Baseline };

struct ControllerConfig {
  ControllerLaw law = ControllerLaw::Ftsm;
  TradeoffMode mode = TradeoffMode::VoltageOnly;
  FtsmParams ftsm;
  double k1 = 3e5, k2 = 1200.0;  // baseline gains
  double u_max_factor = 2.0;        // actuator clamp at u_max_factor * v_ref
  double slew_rate = 0.0;           // V/s actuator rate limit; 0 disables
  bool active_from_start = false;
};

struct ObserverConfig {
  bool enabled = true;
  double q_x1 = 1e-2, q_x2 = 1e2;  // diag of Q_x
  double q_xi = 1e17;
  double r_min = 1e-4;             // filter R floor when sigma2 is tiny
  std::optional<Eigen::Vector3d> p0_diag;  // explicit diag P0; empty = CARE steady state
  int substeps = 1;
};

struct NoiseSettings {
  double sigma2 = 0.0;  // measurement variance on v_od (V^2)
  bool extend_without_observer = true;  // noise on all controller-visible signals
};

struct DgConfig {
  std::string name;
  std::string bus;
  DGParams params;
  PerturbationConfig perturb;
};

/// Complete description of one deterministic run.
struct Scenario {
  double duration = 4.0;
  double dt_plant = 2e-7;
  double control_period = 2e-6;
  double record_period = 1e-4;  // trace cadence; integer multiple of control_period
  uint64_t seed = 1;
  double v_ref = 311.0;
  double reconnect_ramp = 0.05;      // s, V_n ramp length at plug-in
  double reconnect_v_frac = 0.9;     // ramp start as a fraction of v_ref
  double reconnect_hold = 0.15;      // s, post-reclose observer quarantine

  std::vector<DgConfig> dgs;
  NetworkModel network;
  std::shared_ptr<const CommGraph> graph;
  ControllerConfig controller;
  ObserverConfig observer;
  NoiseSettings noise;
  std::vector<Event> events;

  int dg_count() const { return static_cast<int>(dgs.size()); }
  int dg_index(const std::string& name) const;  // -1 if unknown
  /// Throws std::invalid_argument / ConfigError on violated invariants.
  void validate() const;
};

/// Reads a scenario file (sections: scenario, dg, network, line, load, graph,
/// controller, observer, noise, events) with full schema validation.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& path);

}  // namespace mgsim
