#include "mgsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mgsim/integrator.hpp"

namespace mgsim {

PlantModel::PlantModel(const Scenario& scenario)
    : net(scenario.network),
      leader(scenario.graph->first_pinned()),
      n_dg_(scenario.dg_count()),
      n_lines_(static_cast<int>(scenario.network.lines.size())),
      n_loads_(static_cast<int>(scenario.network.loads.size())) {
  for (const auto& dg : scenario.dgs) {
    nominal_params.push_back(dg.params);
    plant_params.push_back(dg.perturb.apply(dg.params));
  }
  inj_.assign(static_cast<size_t>(2 * n_dg_), 0.0);
  vbus_d_.assign(static_cast<size_t>(net.bus_count()), 0.0);
  vbus_q_.assign(static_cast<size_t>(net.bus_count()), 0.0);
  omega_.assign(static_cast<size_t>(n_dg_), 0.0);
}

std::vector<std::string> PlantModel::state_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(state_count()));
  for (int i = 0; i < n_dg_; ++i)
    for (int s = 0; s < kDgStateCount; ++s)
      names.push_back("dg" + std::to_string(i + 1) + "." + dg_state_name(s));
  for (const auto& ln : net.lines) {
    names.push_back(ln.name + ".iD");
    names.push_back(ln.name + ".iQ");
  }
  for (const auto& ld : net.loads) {
    names.push_back(ld.name + ".iD");
    names.push_back(ld.name + ".iQ");
  }
  return names;
}

double PlantModel::omega_com(const double* x, int& source) const {
  if (net.dg_attachments[leader].breaker_closed) {
    source = leader;
    return droop_omega(plant_params[leader], x + dg_offset(leader));
  }
  for (int i = 0; i < n_dg_; ++i)
    if (net.dg_attachments[i].breaker_closed) {
      source = i;
      return droop_omega(plant_params[i], x + dg_offset(i));
    }
  throw std::runtime_error("omega_com: no connected DG to define the common frame");
}

void PlantModel::resolve_buses(const double* x) {
  for (int i = 0; i < n_dg_; ++i) {
    const int off = dg_offset(i);
    if (net.dg_attachments[i].breaker_closed) {
      local_to_common(x[off + kDelta], x[off + kIoD], x[off + kIoQ],
                      inj_[2 * i], inj_[2 * i + 1]);
    } else {
      inj_[2 * i] = 0.0;
      inj_[2 * i + 1] = 0.0;
    }
  }
  bus_voltages(net, x + net_offset(), inj_.data(), vbus_d_.data(), vbus_q_.data());
}

void PlantModel::derivative(const double* x, const double* u, double* dx) {
  int src = leader;
  const double wcom = omega_com(x, src);
  resolve_buses(x);
  for (int i = 0; i < n_dg_; ++i) {
    const int off = dg_offset(i);
    const bool closed = net.dg_attachments[i].breaker_closed;
    double v_bd = 0.0, v_bq = 0.0;
    if (closed) {
      const int bus = net.dg_attachments[i].bus;
      common_to_local(x[off + kDelta], vbus_d_[bus], vbus_q_[bus], v_bd, v_bq);
    }
    dg_derivative(plant_params[i], x + off, u[i], v_bd, v_bq, wcom, closed, dx + off);
  }
  network_derivative(net, x + net_offset(), vbus_d_.data(), vbus_q_.data(), wcom,
                     dx + net_offset());
}

void PlantModel::local_bus_voltage(const double* x, int i, double& v_bd, double& v_bq) {
  resolve_buses(x);
  const int bus = net.dg_attachments[i].bus;
  common_to_local(x[dg_offset(i) + kDelta], vbus_d_[bus], vbus_q_[bus], v_bd, v_bq);
}

void PlantModel::bus_voltage_common(const double* x, int i, double& v_d, double& v_q) {
  resolve_buses(x);
  const int bus = net.dg_attachments[i].bus;
  v_d = vbus_d_[bus];
  v_q = vbus_q_[bus];
}

double PlantModel::power_residual_rel(const double* x) {
  resolve_buses(x);
  double p_dg = 0.0, p_rc = 0.0;
  for (int i = 0; i < n_dg_; ++i) {
    const int off = dg_offset(i);
    if (!net.dg_attachments[i].breaker_closed) continue;
    p_dg += x[off + kVoD] * x[off + kIoD] + x[off + kVoQ] * x[off + kIoQ];
    p_rc += plant_params[i].r_c *
            (x[off + kIoD] * x[off + kIoD] + x[off + kIoQ] * x[off + kIoQ]);
  }
  const double* nx = x + net_offset();
  double p_line = 0.0;
  for (int k = 0; k < n_lines_; ++k)
    p_line += net.lines[k].r * (nx[2 * k] * nx[2 * k] + nx[2 * k + 1] * nx[2 * k + 1]);
  double p_load = 0.0;
  for (int m = 0; m < n_loads_; ++m) {
    if (!net.loads[m].connected) continue;
    const int o = 2 * (n_lines_ + m);
    p_load += net.load_r_eff(m) * (nx[o] * nx[o] + nx[o + 1] * nx[o + 1]);
  }
  double p_virt = 0.0;
  for (int b = 0; b < net.bus_count(); ++b)
    p_virt += (vbus_d_[b] * vbus_d_[b] + vbus_q_[b] * vbus_q_[b]) / net.r_virtual;
  const double residual = p_dg - p_rc - p_line - p_load - p_virt;
  return residual / std::max(p_load, 1.0);
}

namespace {

// Per-DG controller/observer context.
struct DgCtl {
  EskbfState filter{};
  bool filter_ready = false;
  bool pending_obs_reset = false;
  double u = 0.0;  // applied V_n over the coming period
  double z = 0.0;  // published virtual command
  bool attached = false;
  bool in_ramp = false;
  double ramp_start = 0.0;
  double quarantine_until = -1.0;  // post-reclose observer settling window
  double sync_hold = 0.0;          // bus magnitude captured at reclose
  double last_y = 0.0;
  bool have_last_y = false;
  std::mt19937_64 rng;
  std::normal_distribution<double> gauss{0.0, 1.0};
  double sigma = 0.0;
  // last-period values for the trace
  double s = 0.0, e1 = 0.0, e2 = 0.0;
  double y1_used = 0.0, y2_used = 0.0, xi_used = 0.0;
  double y_meas = 0.0;
  bool sat = false;
};

uint64_t mix_seed(uint64_t seed, int i) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

namespace {
Scenario validated(Scenario sc) {
  sc.validate();
  return sc;
}
}  // namespace

Simulation::Simulation(Scenario scenario)
    : scenario_(validated(std::move(scenario))), plant_(scenario_) {}

RunResult Simulation::run() {
  const Scenario& sc = scenario_;
  const int n = sc.dg_count();
  const int nx = plant_.state_count();
  const double period = sc.control_period;
  const long total_periods = llround(sc.duration / period);
  const int steps_per_period = static_cast<int>(llround(period / sc.dt_plant));
  const double dt = period / steps_per_period;
  const long record_every = llround(sc.record_period / period);
  const double u_max = sc.controller.u_max_factor * sc.v_ref;

  RunResult result;
  RunDiagnostics& diag = result.diag;
  diag.min_p_eig = std::numeric_limits<double>::infinity();

  std::vector<double> x(static_cast<size_t>(nx), 0.0);
  std::vector<double> u(static_cast<size_t>(n), sc.v_ref);
  std::vector<double> k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), tmp(x.size());

  // Controllers and observers.
  std::vector<DgCtl> ctl(static_cast<size_t>(n));
  const double sigma0 = std::sqrt(sc.noise.sigma2);
  for (int i = 0; i < n; ++i) {
    DgCtl& c = ctl[static_cast<size_t>(i)];
    c.rng.seed(mix_seed(sc.seed, i));
    c.sigma = sigma0;
    c.u = sc.v_ref;
    c.attached = false;
    const ExtendedModel model(plant_.nominal_params[static_cast<size_t>(i)].g0());
    NoiseConfig nc;
    nc.q_x = Eigen::Vector2d(sc.observer.q_x1, sc.observer.q_x2).asDiagonal();
    nc.q_xi = sc.observer.q_xi;
    nc.r_x = std::max(sc.noise.sigma2, sc.observer.r_min);
    nc.sigma2_meas = sc.noise.sigma2;
    nc.seed = sc.seed;
    Eigen::Matrix3d p0;
    if (sc.observer.p0_diag) {
      p0 = sc.observer.p0_diag->asDiagonal();
    } else {
      Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
      q(0, 0) = nc.q_x(0, 0);
      q(1, 1) = nc.q_x(1, 1);
      q(2, 2) = nc.q_xi;
      p0 = care_steady_covariance(model, q, nc.r_x);
    }
    c.filter = eskbf_init(model, nc, Eigen::Vector3d::Zero(), p0, sc.observer.substeps);
  }

  std::vector<NeighborMsg> pub(static_cast<size_t>(n)), pub_next(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pub[static_cast<size_t>(i)].sender = i;

  bool secondary_on = sc.controller.active_from_start;
  const ReferenceSignal ref{sc.v_ref, 0.0};
  const bool tradeoff_active = sc.controller.mode != TradeoffMode::VoltageOnly;

  result.trace.dg_names.reserve(static_cast<size_t>(n));
  for (const auto& dg : sc.dgs) result.trace.dg_names.push_back(dg.name);
  result.trace.records.reserve(static_cast<size_t>(total_periods / record_every + 2));

  // Lie probe geometry: central FD of dv_od/dt at mid-period samples.
  const int probe_mid = steps_per_period / 2;
  int probe_off = static_cast<int>(llround(2e-5 / dt));
  probe_off = std::max(1, std::min(probe_off, probe_mid > 1 ? probe_mid - 1 : 1));
  std::vector<double> probe_minus(static_cast<size_t>(n));
  std::vector<double> probe_oracle(static_cast<size_t>(n));
  std::vector<char> probe_live(static_cast<size_t>(n), 0);

  size_t next_event = 0;
  int prev_omega_source = plant_.leader;
  std::vector<NeighborMsg> snapshot(static_cast<size_t>(n));
  std::vector<char> dg_was_closed(static_cast<size_t>(n));
  std::vector<char> load_was_connected(plant_.net.loads.size());
  std::vector<double> surfaces;
  surfaces.reserve(static_cast<size_t>(n));

  for (long k = 0; k <= total_periods; ++k) {
    const double t = static_cast<double>(k) * period;

    // Apply events scheduled for this period boundary. Breaker side effects
    // are keyed on the net transition across all same-timestamp events, so a
    // zero-duration disconnect/reconnect pair is a no-op.
    for (int i = 0; i < n; ++i)
      dg_was_closed[static_cast<size_t>(i)] =
          plant_.net.dg_attachments[static_cast<size_t>(i)].breaker_closed;
    for (size_t m = 0; m < plant_.net.loads.size(); ++m)
      load_was_connected[m] = plant_.net.loads[m].connected;

    while (next_event < sc.events.size() &&
           llround(sc.events[next_event].time / period) == k) {
      const Event& ev = sc.events[next_event];
      diag.log.emplace_back(t, std::string("event: ") + to_string(ev.kind) +
                                   (ev.target.empty() ? "" : " " + ev.target));
      switch (ev.kind) {
        case EventKind::ActivateSecondary:
          secondary_on = true;
          break;
        case EventKind::DeactivateSecondary:
          secondary_on = false;
          break;
        case EventKind::LoadConnect:
        case EventKind::LoadDisconnect:
          set_breaker(plant_.net, ev.target, ev.kind == EventKind::LoadConnect);
          break;
        case EventKind::LoadScale:
          for (auto& ld : plant_.net.loads)
            if (ld.name == ev.target) ld.scale *= ev.value;
          break;
        case EventKind::DgDisconnect:
          set_dg_breaker(plant_.net, sc.dg_index(ev.target), false);
          break;
        case EventKind::DgReconnect:
          set_dg_breaker(plant_.net, sc.dg_index(ev.target), true);
          break;
        case EventKind::SetNoiseVariance: {
          const double sigma = std::sqrt(ev.value);
          for (auto& c : ctl) {
            c.sigma = sigma;
            c.filter.r = std::max(ev.value, sc.observer.r_min);
          }
          break;
        }
      }
      ++next_event;
    }

    for (size_t m = 0; m < plant_.net.loads.size(); ++m) {
      if (load_was_connected[m] && !plant_.net.loads[m].connected) {
        const size_t o =
            static_cast<size_t>(plant_.net_offset()) + 2 * (plant_.net.lines.size() + m);
        x[o] = 0.0;
        x[o + 1] = 0.0;
      }
    }
    for (int i = 0; i < n; ++i) {
      const bool now_closed =
          plant_.net.dg_attachments[static_cast<size_t>(i)].breaker_closed;
      DgCtl& c = ctl[static_cast<size_t>(i)];
      const size_t off = static_cast<size_t>(plant_.dg_offset(i));
      if (dg_was_closed[static_cast<size_t>(i)] && !now_closed) {
        x[off + kIoD] = 0.0;
        x[off + kIoQ] = 0.0;
        c.attached = false;
        c.in_ramp = false;
        c.u = sc.v_ref;
        c.z = 0.0;
      } else if (!dg_was_closed[static_cast<size_t>(i)] && now_closed) {
        // Reclose is staged: the breaker reopens until the V_n ramp on the
        // islanded unit completes, then closes voltage- and phase-matched.
        plant_.net.dg_attachments[static_cast<size_t>(i)].breaker_closed = false;
        c.pending_obs_reset = true;
        c.in_ramp = true;
        c.ramp_start = t;
        diag.log.emplace_back(t, "reclose ramp started (dg index " +
                                     std::to_string(i) + ")");
      }
    }

    int omega_source = plant_.leader;
    const double wcom = plant_.omega_com(x.data(), omega_source);
    if (omega_source != prev_omega_source) {
      diag.log.emplace_back(t, "omega_com source switched to dg index " +
                                   std::to_string(omega_source));
      ++diag.leader_switches;
      prev_omega_source = omega_source;
    }

    // Controller + observer stage, deterministic DG index order, one-period
    // delayed neighbor snapshot.
    snapshot = pub;
    for (int i = 0; i < n; ++i) {
      DgCtl& c = ctl[static_cast<size_t>(i)];
      const size_t off = static_cast<size_t>(plant_.dg_offset(i));
      const bool connected = plant_.net.dg_attachments[static_cast<size_t>(i)].breaker_closed;
      const DGParams& nom = plant_.nominal_params[static_cast<size_t>(i)];

      const double y_true = x[off + kVoD];
      const double y = y_true + c.gauss(c.rng) * c.sigma;
      c.y_meas = y;

      if (c.pending_obs_reset) {
        eskbf_reset_on_reconnect(c.filter, y);
        c.pending_obs_reset = false;
        diag.log.emplace_back(t, "eskbf reset applied (dg index " + std::to_string(i) + ")");
      }
      if (sc.observer.enabled) {
        if (!c.filter_ready) {
          c.filter.x_hat << y, 0.0, 0.0;
          c.filter_ready = true;
        } else {
          const int before = c.filter.reset_warnings;
          eskbf_step(c.filter, y, c.u, period);
          if (c.filter.reset_warnings != before) {
            ++diag.covariance_resets;
            diag.log.emplace_back(t, "eskbf covariance reset (dg index " +
                                         std::to_string(i) + ")");
          }
          diag.min_p_eig = std::min(diag.min_p_eig, c.filter.min_eig_seen);
        }
      }

      // Controller-visible signals.
      double y1, y2, xi_hat;
      if (sc.observer.enabled) {
        y1 = c.filter.x_hat(0);
        y2 = c.filter.x_hat(1);
        xi_hat = c.filter.x_hat(2);
      } else {
        y1 = y;
        y2 = c.have_last_y ? (y - c.last_y) / period : 0.0;
        // Indirect Lie evaluation from (noisy) measured signals.
        double xm[kDgStateCount];
        for (int sidx = 0; sidx < kDgStateCount; ++sidx) xm[sidx] = x[off + sidx];
        double v_bd = 0.0, v_bq = 0.0;
        if (connected) plant_.local_bus_voltage(x.data(), i, v_bd, v_bq);
        if (sc.noise.extend_without_observer && c.sigma > 0.0) {
          xm[kVoD] = y;
          xm[kVoQ] += c.gauss(c.rng) * c.sigma;
          xm[kIlD] += c.gauss(c.rng) * c.sigma;
          xm[kIlQ] += c.gauss(c.rng) * c.sigma;
          xm[kIoD] += c.gauss(c.rng) * c.sigma;
          xm[kIoQ] += c.gauss(c.rng) * c.sigma;
          xm[kP] += c.gauss(c.rng) * c.sigma;
          xm[kQ] += c.gauss(c.rng) * c.sigma;
          v_bd += c.gauss(c.rng) * c.sigma;
        } else {
          xm[kVoD] = y;
        }
        const double omega_meas = nom.omega_n - nom.m_p * xm[kP];
        xi_hat = lie_lf2_h(nom, xm, v_bd, omega_meas);
      }
      c.y1_used = y1;
      c.y2_used = y2;
      c.xi_used = xi_hat;

      // Reconnection ramp: V_n climbs from a fraction of v_ref toward the
      // measured bus magnitude on the islanded unit; the breaker then closes
      // voltage- and phase-matched, the unit follows the bus through a short
      // quarantine, and only then the secondary law reattaches.
      bool dg_connected = connected;
      if (c.in_ramp) {
        const double frac = (t - c.ramp_start) / sc.reconnect_ramp;
        double vb_d = 0.0, vb_q = 0.0;
        plant_.bus_voltage_common(x.data(), i, vb_d, vb_q);
        const double bus_mag = std::hypot(vb_d, vb_q);
        const double sync_target =
            bus_mag > 0.5 * sc.v_ref ? std::min(bus_mag, u_max) : sc.v_ref;
        if (frac >= 1.0) {
          c.in_ramp = false;
          c.u = sync_target;
          const size_t doff = static_cast<size_t>(plant_.dg_offset(i));
          x[doff + kIoD] = 0.0;
          x[doff + kIoQ] = 0.0;
          // Synchro-close: align the local frame with the bus voltage angle.
          if (bus_mag > 1.0) x[doff + kDelta] = std::atan2(vb_q, vb_d);
          set_dg_breaker(plant_.net, i, true);
          dg_connected = true;
          c.quarantine_until = t + sc.reconnect_hold;
          c.sync_hold = sync_target;
          diag.log.emplace_back(t, "breaker reclosed (dg index " + std::to_string(i) +
                                       ", bus magnitude " + std::to_string(bus_mag) + " V)");
        } else {
          const double start = sc.reconnect_v_frac * sc.v_ref;
          c.u = start + (sync_target - start) * frac;
          c.attached = false;
          c.z = 0.0;
          c.s = c.e1 = c.e2 = 0.0;
          c.sat = false;
        }
      }
      const bool quarantined = dg_connected && t < c.quarantine_until;
      if (quarantined && !c.in_ramp) {
        // Electrically neutral hold until the observer has re-converged: the
        // droop compensation keeps v_od pinned at the captured bus magnitude.
        c.u = std::min(c.sync_hold + nom.n_q * x[off + kQ], u_max);
      }
      if (!c.in_ramp) {
        c.attached = secondary_on && dg_connected && !quarantined;
        if (c.attached) {
          const double nq_q = nom.n_q * x[off + kQ];
          TrackingErrors errs =
              tracking_errors(*sc.graph, sc.controller.mode, i, y1, y2, nq_q, snapshot, ref);
          c.e1 = errs.e1;
          c.e2 = errs.e2;
          if (errs.d_eff > 0.0) {
            double z;
            if (sc.controller.law == ControllerLaw::Ftsm) {
              c.s = tradeoff_active
                        ? tradeoff_surface(sc.controller.ftsm, errs.e1, errs.e2, errs.e_q)
                        : ftsm_surface(sc.controller.ftsm, errs.e1, errs.e2);
              z = ftsm_law(sc.controller.ftsm, c.s, errs.e1, errs.e2, errs.sum_a_z,
                           errs.d_eff);
            } else {
              c.s = 0.0;
              z = baseline_law(sc.controller.k1, sc.controller.k2, errs.e1, errs.e2,
                               errs.sum_a_z, errs.d_eff);
            }
            ActuatorCommand cmd = invert_input(z, xi_hat, nom.g0(), u_max, c.u,
                                               sc.controller.slew_rate, period);
            c.u = cmd.u;
            c.sat = cmd.saturated;
            c.z = z;
          } else {
            c.z = 0.0;  // isolated node: no neighborhood information this period
            c.sat = false;
          }
        } else {
          c.u = sc.v_ref;
          c.z = 0.0;
          c.s = c.e1 = c.e2 = 0.0;
          c.sat = false;
        }
      }

      NeighborMsg& msg = pub_next[static_cast<size_t>(i)];
      msg.sender = i;
      msg.y1_hat = y1;
      msg.y2_hat = y2;
      msg.z = c.z;
      msg.nq_times_q = nom.n_q * x[off + kQ];
      msg.stale = !dg_connected || quarantined;
      msg.timestamp = t;

      c.last_y = y;
      c.have_last_y = true;
    }
    pub = pub_next;
    for (int i = 0; i < n; ++i) u[static_cast<size_t>(i)] = ctl[static_cast<size_t>(i)].u;

    // Trace record on the record cadence.
    if (k % record_every == 0) {
      TraceRecord rec;
      rec.t = t;
      rec.omega_com = wcom;
      rec.dg.resize(static_cast<size_t>(n));
      surfaces.clear();
      for (int i = 0; i < n; ++i) {
        const DgCtl& c = ctl[static_cast<size_t>(i)];
        const size_t off = static_cast<size_t>(plant_.dg_offset(i));
        const bool connected =
            plant_.net.dg_attachments[static_cast<size_t>(i)].breaker_closed;
        DgTraceSlice& d = rec.dg[static_cast<size_t>(i)];
        d.v_od = x[off + kVoD];
        d.v_oq = x[off + kVoQ];
        d.p = x[off + kP];
        d.q = x[off + kQ];
        d.u = c.u;
        d.s = c.s;
        d.e1 = c.e1;
        d.e2 = c.e2;
        if (sc.observer.enabled) {
          d.x_hat1 = c.filter.x_hat(0);
          d.x_hat2 = c.filter.x_hat(1);
          d.x_hat3 = c.filter.x_hat(2);
          d.p11 = c.filter.p(0, 0);
          d.p22 = c.filter.p(1, 1);
          d.p33 = c.filter.p(2, 2);
          d.innovation = c.filter.innovation(c.y_meas);
        } else {
          d.x_hat1 = c.y1_used;
          d.x_hat2 = c.y2_used;
          d.x_hat3 = c.xi_used;
        }
        const DGParams& plant_p = plant_.plant_params[static_cast<size_t>(i)];
        const double omega_i = droop_omega(plant_p, x.data() + off);
        d.vdot_true = vdot_od(plant_p, x.data() + off, omega_i);
        double v_bd = 0.0, v_bq = 0.0;
        if (connected) plant_.local_bus_voltage(x.data(), i, v_bd, v_bq);
        d.xi_true = ground_truth_xi(plant_p, plant_.nominal_params[static_cast<size_t>(i)],
                                    x.data() + off, v_bd, omega_i, c.u);
        d.saturated = c.sat;
        d.connected = connected;
        if (c.attached && connected) surfaces.push_back(c.s);
      }
      rec.lyapunov = lyapunov_diag(surfaces);
      result.trace.records.push_back(std::move(rec));
      diag.power_residual_rel.push_back(plant_.power_residual_rel(x.data()));
    }

    if (k == total_periods) break;

    // Integrate the plant over one control period with zero-order-held u.
    auto deriv = [&](const double* xs, double* dxs) {
      plant_.derivative(xs, u.data(), dxs);
    };
    const bool probing = lie_probe_ && k > 0 && k % record_every == 0;
    for (int step = 0; step < steps_per_period; ++step) {
      if (probing) {
        if (step == probe_mid - probe_off || step == probe_mid + probe_off ||
            step == probe_mid) {
          for (int i = 0; i < n; ++i) {
            const size_t off = static_cast<size_t>(plant_.dg_offset(i));
            const bool connected =
                plant_.net.dg_attachments[static_cast<size_t>(i)].breaker_closed;
            if (!connected) {
              probe_live[static_cast<size_t>(i)] = 0;
              continue;
            }
            const DGParams& pp = plant_.plant_params[static_cast<size_t>(i)];
            const double omega_i = droop_omega(pp, x.data() + off);
            const double vd = vdot_od(pp, x.data() + off, omega_i);
            if (step == probe_mid - probe_off) {
              probe_minus[static_cast<size_t>(i)] = vd;
              probe_live[static_cast<size_t>(i)] = 1;
            } else if (step == probe_mid) {
              double v_bd = 0.0, v_bq = 0.0;
              plant_.local_bus_voltage(x.data(), i, v_bd, v_bq);
              probe_oracle[static_cast<size_t>(i)] =
                  lie_lf2_h(pp, x.data() + off, v_bd, omega_i) +
                  lie_lg_lf_h(pp) * u[static_cast<size_t>(i)];
            } else if (probe_live[static_cast<size_t>(i)]) {
              const double h = probe_off * dt;
              LieProbeSample sample;
              sample.t = t + (probe_mid)*dt;
              sample.dg = i;
              sample.fd_value = (vd - probe_minus[static_cast<size_t>(i)]) / (2.0 * h);
              sample.oracle_value = probe_oracle[static_cast<size_t>(i)];
              diag.lie_probe.push_back(sample);
            }
          }
        }
      }
      rk4_step(deriv, x.data(), nx, dt, k1.data(), k2.data(), k3.data(), k4.data(),
               tmp.data());
    }

    // Blowup check once per period; NaN/Inf propagates within microseconds of
    // simulated time, so the report lands at most one period after onset.
    for (int idx = 0; idx < nx; ++idx) {
      if (!std::isfinite(x[static_cast<size_t>(idx)])) {
        diag.blew_up = true;
        diag.blowup_time = t + period;
        diag.blowup_what = "non-finite state '" + plant_.state_names()[static_cast<size_t>(idx)] +
                           "' (index " + std::to_string(idx) + ")";
        diag.log.emplace_back(diag.blowup_time, "blowup: " + diag.blowup_what);
        break;
      }
    }
    if (diag.blew_up) break;
  }

  result.exit_code = diag.blew_up ? 2 : 0;
  result.metrics = Metrics{};
  if (!result.trace.empty()) {
    try {
      result.metrics = compute_metrics(result.trace, sc);
      result.metrics.covariance_resets = diag.covariance_resets;
    } catch (const std::exception&) {
      // Partial traces from a blowup may be too short for metrics.
    }
  }
  return result;
}

RunResult run(const Scenario& scenario) { return Simulation(scenario).run(); }

std::vector<SweepPoint> run_noise_sweep(const Scenario& scenario,
                                        const std::vector<double>& variances) {
  std::vector<SweepPoint> out;
  for (double var : variances) {
    if (var < 0.0)
      throw std::invalid_argument("run_noise_sweep: variance must be nonnegative");
    SweepPoint pt;
    pt.variance = var;
    Scenario with = scenario;
    with.noise.sigma2 = var;
    with.observer.enabled = true;
    pt.with_observer = Simulation(with).run().metrics;
    Scenario without = scenario;
    without.noise.sigma2 = var;
    without.observer.enabled = false;
    pt.without_observer = Simulation(without).run().metrics;
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace mgsim
