#include "mgsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mgsim/config_parser.hpp"

namespace mgsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ActivateSecondary: return "activate-secondary";
    case EventKind::DeactivateSecondary: return "deactivate-secondary";
    case EventKind::LoadConnect: return "load-connect";
    case EventKind::LoadDisconnect: return "load-disconnect";
    case EventKind::LoadScale: return "load-scale";
    case EventKind::DgDisconnect: return "dg-disconnect";
    case EventKind::DgReconnect: return "dg-reconnect";
    case EventKind::SetNoiseVariance: return "set-noise-variance";
  }
  return "?";
}

int Scenario::dg_index(const std::string& name) const {
  for (int i = 0; i < dg_count(); ++i)
    if (dgs[i].name == name) return i;
  return -1;
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (!(dt_plant > 0.0)) throw std::invalid_argument("scenario: dt_plant must be positive");
  if (dt_plant > control_period)
    throw std::invalid_argument("scenario: dt_plant must not exceed control_period");
  const double ratio = control_period / dt_plant;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw std::invalid_argument(
        "scenario: control_period must be an integer multiple of dt_plant");
  const double periods = duration / control_period;
  if (std::abs(periods - std::round(periods)) > 1e-6)
    throw std::invalid_argument(
        "scenario: duration must be an integer multiple of control_period");
  const double rec_ratio = record_period / control_period;
  if (record_period < control_period ||
      std::abs(rec_ratio - std::round(rec_ratio)) > 1e-6)
    throw std::invalid_argument(
        "scenario: record_period must be an integer multiple of control_period");
  const double rec_in_duration = duration / record_period;
  if (std::abs(rec_in_duration - std::round(rec_in_duration)) > 1e-6)
    throw std::invalid_argument(
        "scenario: duration must be an integer multiple of record_period");
  if (!(v_ref > 0.0)) throw std::invalid_argument("scenario: v_ref must be positive");
  if (dgs.empty()) throw std::invalid_argument("scenario: no DGs defined");
  if (!graph) throw std::invalid_argument("scenario: no communication graph");
  if (graph->size() != dg_count())
    throw std::invalid_argument("scenario: graph has " + std::to_string(graph->size()) +
                                " nodes but " + std::to_string(dg_count()) +
                                " DGs are defined");
  if (static_cast<int>(network.dg_attachments.size()) != dg_count())
    throw std::invalid_argument("scenario: network attaches " +
                                std::to_string(network.dg_attachments.size()) +
                                " DGs but " + std::to_string(dg_count()) + " are defined");
  network.validate();
  for (const auto& dg : dgs) {
    dg.params.validate(dg.name);
    dg.perturb.validate(dg.name);
  }
  controller.ftsm.validate();
  if (!(controller.k1 > 0.0) || !(controller.k2 > 0.0))
    throw std::invalid_argument("scenario: baseline gains k1, k2 must be positive");
  if (observer.substeps < 1)
    throw std::invalid_argument("scenario: observer substeps must be >= 1");
  if (noise.sigma2 < 0.0)
    throw std::invalid_argument("scenario: noise sigma2 must be nonnegative");

  double prev = 0.0;
  for (const auto& ev : events) {
    if (ev.time < 0.0 || ev.time > duration)
      throw std::invalid_argument("scenario: event '" + std::string(to_string(ev.kind)) +
                                  "' at t=" + std::to_string(ev.time) +
                                  " lies outside [0, duration]");
    if (ev.time < prev)
      throw std::invalid_argument("scenario: events must be time-sorted");
    prev = ev.time;
    const double at = ev.time / control_period;
    if (std::abs(at - std::round(at)) > 1e-6)
      throw std::invalid_argument("scenario: event '" + std::string(to_string(ev.kind)) +
                                  "' at t=" + std::to_string(ev.time) +
                                  " is not aligned to a control period boundary");
    switch (ev.kind) {
      case EventKind::LoadConnect:
      case EventKind::LoadDisconnect:
      case EventKind::LoadScale: {
        bool known = std::any_of(network.loads.begin(), network.loads.end(),
                                 [&](const LoadBranch& l) { return l.name == ev.target; });
        if (!known)
          throw std::invalid_argument("scenario: event references unknown load '" +
                                      ev.target + "'");
        if (ev.kind == EventKind::LoadScale && !(ev.value > 0.0))
          throw std::invalid_argument("scenario: load-scale factor must be positive");
        break;
      }
      case EventKind::DgDisconnect:
      case EventKind::DgReconnect:
        if (dg_index(ev.target) < 0)
          throw std::invalid_argument("scenario: event references unknown DG '" +
                                      ev.target + "'");
        break;
      case EventKind::SetNoiseVariance:
        if (ev.value < 0.0)
          throw std::invalid_argument("scenario: set-noise-variance must be nonnegative");
        break;
      default:
        break;
    }
  }
}

namespace {

DGParams parse_dg_params(const ConfigDocument& doc, const ConfigSection& sec) {
  DGParams p;
  const std::string& path = doc.path;
  p.m_p = sec.require_double(path, "m_p");
  p.n_q = sec.require_double(path, "n_q");
  p.omega_c = sec.get_double(path, "omega_c", 31.41);
  p.r_f = sec.require_double(path, "r_f");
  p.l_f = sec.require_double(path, "l_f");
  p.c_f = sec.require_double(path, "c_f");
  p.r_c = sec.require_double(path, "r_c");
  p.l_c = sec.require_double(path, "l_c");
  p.k_pv = sec.require_double(path, "k_pv");
  p.k_iv = sec.require_double(path, "k_iv");
  p.k_pc = sec.require_double(path, "k_pc");
  p.k_ic = sec.require_double(path, "k_ic");
  p.omega_b = sec.get_double(path, "omega_b", 2.0 * M_PI * 50.0);
  p.omega_n = sec.get_double(path, "omega_n", p.omega_b);
  return p;
}

PerturbationConfig parse_perturb(const ConfigDocument& doc, const ConfigSection& sec) {
  PerturbationConfig f;
  const std::string& path = doc.path;
  f.r_f = sec.get_double(path, "perturb_r_f", 1.0);
  f.l_f = sec.get_double(path, "perturb_l_f", 1.0);
  f.c_f = sec.get_double(path, "perturb_c_f", 1.0);
  f.r_c = sec.get_double(path, "perturb_r_c", 1.0);
  f.l_c = sec.get_double(path, "perturb_l_c", 1.0);
  return f;
}

EventKind parse_event_kind(const std::string& path, int line, const std::string& tag) {
  static const std::pair<const char*, EventKind> table[] = {
      {"activate-secondary", EventKind::ActivateSecondary},
      {"deactivate-secondary", EventKind::DeactivateSecondary},
      {"load-connect", EventKind::LoadConnect},
      {"load-disconnect", EventKind::LoadDisconnect},
      {"load-scale", EventKind::LoadScale},
      {"dg-disconnect", EventKind::DgDisconnect},
      {"dg-reconnect", EventKind::DgReconnect},
      {"set-noise-variance", EventKind::SetNoiseVariance},
  };
  for (const auto& [name, kind] : table)
    if (tag == name) return kind;
  throw ConfigError(path, line, "unknown event kind '" + tag + "'");
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& path) {
  ConfigDocument doc = parse_config_text(text, path);
  Scenario sc;

  const ConfigSection* top = doc.find("scenario");
  if (!top) throw ConfigError(path, 0, "missing [scenario] section");
  sc.duration = top->get_double(path, "duration", 4.0);
  sc.dt_plant = top->get_double(path, "dt_plant", 2e-7);
  sc.control_period = top->get_double(path, "control_period", 2e-6);
  sc.record_period = top->get_double(path, "record_period", 1e-4);
  sc.seed = static_cast<uint64_t>(top->get_int(path, "seed", 1));
  sc.v_ref = top->get_double(path, "v_ref", 311.0);
  sc.reconnect_ramp = top->get_double(path, "reconnect_ramp", 0.05);
  sc.reconnect_v_frac = top->get_double(path, "reconnect_v_frac", 0.9);
  sc.reconnect_hold = top->get_double(path, "reconnect_hold", 0.02);

  // Network: buses first so lines/loads/DGs can resolve them.
  const ConfigSection* netsec = doc.find("network");
  if (!netsec) throw ConfigError(path, 0, "missing [network] section");
  for (const auto& bus : split_ws(netsec->require(path, "buses")))
    sc.network.bus_names.push_back(bus);
  sc.network.r_virtual = netsec->get_double(path, "r_virtual", 1000.0);
  netsec->check_all_consumed(path);

  for (const ConfigSection* ls : doc.find_all("line")) {
    LineBranch ln;
    ln.name = ls->name.empty() ? ("line" + std::to_string(sc.network.lines.size() + 1))
                               : ls->name;
    ln.from_bus = sc.network.bus_index(ls->require(path, "from"));
    ln.to_bus = sc.network.bus_index(ls->require(path, "to"));
    if (ln.from_bus < 0 || ln.to_bus < 0)
      throw ConfigError(path, ls->line, "line " + ln.name + " references unknown bus");
    ln.r = ls->require_double(path, "r");
    ln.l = ls->require_double(path, "l");
    ls->check_all_consumed(path);
    sc.network.lines.push_back(std::move(ln));
  }

  for (const ConfigSection* ds : doc.find_all("load")) {
    LoadBranch ld;
    ld.name = ds->name;
    if (ld.name.empty()) throw ConfigError(path, ds->line, "load section needs a name");
    ld.bus = sc.network.bus_index(ds->require(path, "bus"));
    if (ld.bus < 0)
      throw ConfigError(path, ds->line, "load " + ld.name + " references unknown bus");
    ld.r = ds->require_double(path, "r");
    ld.l = ds->require_double(path, "l");
    ld.connected = ds->get_bool(path, "connected", true);
    ds->check_all_consumed(path);
    sc.network.loads.push_back(std::move(ld));
  }

  for (const ConfigSection* gs : doc.find_all("dg")) {
    DgConfig dg;
    dg.name = gs->name;
    if (dg.name.empty()) throw ConfigError(path, gs->line, "dg section needs a name");
    const std::string bus = gs->require(path, "bus");
    int b = sc.network.bus_index(bus);
    if (b < 0)
      throw ConfigError(path, gs->line, "dg " + dg.name + " references unknown bus '" + bus + "'");
    dg.bus = bus;
    dg.params = parse_dg_params(doc, *gs);
    dg.perturb = parse_perturb(doc, *gs);
    bool connected = gs->get_bool(path, "connected", true);
    gs->check_all_consumed(path);
    sc.network.dg_attachments.push_back({b, connected});
    sc.dgs.push_back(std::move(dg));
  }
  if (sc.dgs.empty()) throw ConfigError(path, 0, "no [dg <name>] sections");

  // Communication graph over DG names.
  const ConfigSection* grsec = doc.find("graph");
  if (!grsec) throw ConfigError(path, 0, "missing [graph] section");
  const int n = sc.dg_count();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (const auto& tok : split_ws(grsec->require(path, "edges"))) {
    // "dg1:dg2" or "dg1:dg2:weight", undirected
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= tok.size()) {
      size_t pos = tok.find(':', start);
      if (pos == std::string::npos) {
        parts.push_back(tok.substr(start));
        break;
      }
      parts.push_back(tok.substr(start, pos - start));
      start = pos + 1;
    }
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError(path, grsec->line, "bad edge token '" + tok + "' (want a:b or a:b:w)");
    int i = sc.dg_index(parts[0]), j = sc.dg_index(parts[1]);
    if (i < 0 || j < 0)
      throw ConfigError(path, grsec->line, "edge '" + tok + "' references unknown DG");
    double w = parts.size() == 3 ? parse_double(path, grsec->line, parts[2]) : 1.0;
    adj(i, j) = w;
    adj(j, i) = w;
  }
  Eigen::VectorXd pin = Eigen::VectorXd::Zero(n);
  for (const auto& tok : split_ws(grsec->require(path, "pinned"))) {
    size_t pos = tok.find(':');
    std::string name = pos == std::string::npos ? tok : tok.substr(0, pos);
    double gain = pos == std::string::npos ? 1.0
                                           : parse_double(path, grsec->line, tok.substr(pos + 1));
    int i = sc.dg_index(name);
    if (i < 0)
      throw ConfigError(path, grsec->line, "pinned node '" + name + "' is not a DG");
    pin(i) = gain;
  }
  grsec->check_all_consumed(path);
  try {
    sc.graph = std::make_shared<const CommGraph>(adj, pin);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(path, grsec->line, err.what());
  }

  if (const ConfigSection* cs = doc.find("controller")) {
    auto& ctl = sc.controller;
    const std::string law = cs->get_string("law", "ftsm");
    if (law == "ftsm") ctl.law = ControllerLaw::Ftsm;
    else if (law == "baseline") ctl.law = ControllerLaw::Baseline;
    else throw ConfigError(path, cs->line, "controller law must be ftsm or baseline");
    try {
      ctl.mode = parse_tradeoff_mode(cs->get_string("mode", "voltage-only"));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(path, cs->line, err.what());
    }
    FtsmParams& f = ctl.ftsm;
    f.c = cs->get_double(path, "c", f.c);
    f.d = cs->get_double(path, "d", f.d);
    f.m = cs->get_int(path, "m", f.m);
    f.n = cs->get_int(path, "n", f.n);
    f.p = cs->get_int(path, "p", f.p);
    f.q = cs->get_int(path, "q", f.q);
    f.alpha = cs->get_double(path, "alpha", f.alpha);
    f.beta = cs->get_double(path, "beta", f.beta);
    f.boundary_layer = cs->get_double(path, "boundary_layer", f.boundary_layer);
    f.epsilon_floor = cs->get_double(path, "epsilon_floor", f.epsilon_floor);
    f.c_q = cs->get_double(path, "c_q", f.c_q);
    f.d_q = cs->get_double(path, "d_q", f.d_q);
    f.m1 = cs->get_int(path, "m1", f.m1);
    f.n1 = cs->get_int(path, "n1", f.n1);
    f.p1 = cs->get_int(path, "p1", f.p1);
    f.q1 = cs->get_int(path, "q1", f.q1);
    ctl.k1 = cs->get_double(path, "k1", ctl.k1);
    ctl.k2 = cs->get_double(path, "k2", ctl.k2);
    ctl.u_max_factor = cs->get_double(path, "u_max_factor", ctl.u_max_factor);
    ctl.slew_rate = cs->get_double(path, "slew_rate", ctl.slew_rate);
    ctl.active_from_start = cs->get_bool(path, "active_from_start", false);
    cs->check_all_consumed(path);
  }

  if (const ConfigSection* os = doc.find("observer")) {
    auto& ob = sc.observer;
    ob.enabled = os->get_bool(path, "enabled", true);
    ob.q_x1 = os->get_double(path, "q_x1", ob.q_x1);
    ob.q_x2 = os->get_double(path, "q_x2", ob.q_x2);
    ob.q_xi = os->get_double(path, "q_xi", ob.q_xi);
    ob.r_min = os->get_double(path, "r_min", ob.r_min);
    ob.substeps = os->get_int(path, "substeps", ob.substeps);
    const std::string p0 = os->get_string("p0", "auto");
    if (p0 != "auto") {
      auto toks = split_ws(p0);
      if (toks.size() != 3)
        throw ConfigError(path, os->line, "p0 must be 'auto' or three diagonal values");
      Eigen::Vector3d d;
      for (int i = 0; i < 3; ++i) d(i) = parse_double(path, os->line, toks[i]);
      ob.p0_diag = d;
    }
    os->check_all_consumed(path);
  }

  if (const ConfigSection* ns = doc.find("noise")) {
    sc.noise.sigma2 = ns->get_double(path, "sigma2", 0.0);
    sc.noise.extend_without_observer = ns->get_bool(path, "extend_without_observer", true);
    ns->check_all_consumed(path);
  }

  for (const ConfigSection* es : doc.find_all("events")) {
    for (const auto& [line, text2] : es->raw_lines) {
      auto toks = split_ws(text2);
      if (toks.size() < 2)
        throw ConfigError(path, line, "event line needs at least '<time> <kind>'");
      Event ev;
      ev.time = parse_double(path, line, toks[0]);
      ev.kind = parse_event_kind(path, line, toks[1]);
      switch (ev.kind) {
        case EventKind::LoadConnect:
        case EventKind::LoadDisconnect:
        case EventKind::DgDisconnect:
        case EventKind::DgReconnect:
          if (toks.size() != 3)
            throw ConfigError(path, line, "event needs a target: '<time> <kind> <name>'");
          ev.target = toks[2];
          break;
        case EventKind::LoadScale:
          if (toks.size() != 4)
            throw ConfigError(path, line, "load-scale needs '<time> load-scale <name> <factor>'");
          ev.target = toks[2];
          ev.value = parse_double(path, line, toks[3]);
          break;
        case EventKind::SetNoiseVariance:
          if (toks.size() != 3)
            throw ConfigError(path, line, "set-noise-variance needs '<time> <kind> <sigma2>'");
          ev.value = parse_double(path, line, toks[2]);
          break;
        default:
          if (toks.size() != 2)
            throw ConfigError(path, line, "event takes no arguments: '<time> <kind>'");
          break;
      }
      sc.events.push_back(ev);
    }
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });

  // Fail on unknown section kinds.
  for (const auto& s : doc.sections) {
    static const std::set<std::string> known = {"scenario", "network",  "line",
                                                "load",     "dg",       "graph",
                                                "controller", "observer", "noise", "events"};
    if (!known.count(s.kind))
      throw ConfigError(path, s.line, "unknown section kind '" + s.kind + "'");
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

}  // namespace mgsim
