#include "adaptmps/tevo.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace adaptmps {

void EvolutionPlan::validate() const {
  if (!(dt > 0)) throw InvalidParams("dt must be positive");
  if (n_steps < 1) throw InvalidParams("n_steps must be at least 1");
  if (record_interval < 1) throw InvalidParams("record_interval must be at least 1");
  for (const auto& o : observables)
    if (o.interval < 1) throw InvalidParams("observable interval must be at least 1");
}

Propagator rk4_propagator(AsMpo generator) { return {std::move(generator), std::nullopt, std::nullopt}; }

Propagator unitary_trotter_propagator(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& hamiltonian,
                                      double dt) {
  return {std::nullopt, trotter_gates(spaces, unitary_generator(hamiltonian), dt, 2), std::nullopt};
}

Propagator lindblad_trotter_propagator(const ModelParams& p, double dt, LindbladSplit split) {
  auto terms = lindblad_terms(p);
  auto spaces = vectorized_chain(boson_chain(p.L, p.d));
  std::vector<LocalTerm> gate_terms, local_terms = terms.asymmetric;
  for (const auto& t : terms.symmetric) {
    if (split == LindbladSplit::SiteLocal && t.factors.size() == 1)
      local_terms.push_back(t);
    else
      gate_terms.push_back(t);
  }
  Propagator prop;
  prop.gates = trotter_gates(spaces, gate_terms, dt, 2);
  if (!local_terms.empty()) prop.asym_half = exp_asymmetric_mpo(spaces, local_terms, dt / 2);
  return prop;
}

std::pair<AsMps, double> rk4_step(const AsMpo& generator, const AsMps& state, double dt,
                                  const TruncationPolicy& policy) {
  double w = 0.0, wi = 0.0;
  auto stage = [&](const AsMps& base, const AsMps& k, double c) {
    auto [s, wc] = compress(add_mps(base, scale(k, c)), policy);
    w += wc;
    return s;
  };
  auto k1 = apply_mpo(generator, state, policy, &wi);
  w += wi;
  auto k2 = apply_mpo(generator, stage(state, k1, dt / 2), policy, &wi);
  w += wi;
  auto k3 = apply_mpo(generator, stage(state, k2, dt / 2), policy, &wi);
  w += wi;
  auto k4 = apply_mpo(generator, stage(state, k3, dt), policy, &wi);
  w += wi;
  auto incr = add_mps(add_mps(k1, scale(k2, 2.0)), add_mps(scale(k3, 2.0), k4));
  auto [next, wf] = compress(add_mps(state, scale(incr, dt / 6)), policy);
  return {next, w + wf};
}

namespace {

// theta legs (s1, a_l, s2, a_{l+2}); gate (s1 In, s2 In, t1 Out, t2 Out).
SymTensor apply_two_site(const SymTensor& theta, const SymTensor& gate) {
  auto t = contract(theta, gate, {{0, 0}, {2, 1}}, SectorPolicy::Common);  // (a_l, a_{l+2}, t1, t2)
  return transpose(t, {2, 0, 3, 1});
}

}  // namespace

std::pair<AsMps, double> apply_gates(const GateSchedule& gates, const AsMps& state, const TruncationPolicy& policy) {
  if (state.is_zero()) return {state, 0.0};
  AsMps psi = state.center() ? state : canonicalize(state, 0);
  const std::size_t L = psi.length();
  double w = 0.0;
  for (const auto& layer : gates.layers) {
    if (layer.empty()) continue;
    // sweep away from the current center
    const bool rightward = *psi.center() <= L / 2;
    std::vector<const Gate*> order;
    for (const auto& g : layer) order.push_back(&g);
    if (!rightward) std::reverse(order.begin(), order.end());
    for (const Gate* g : order) {
      if (g->width == 1) {
        psi = canonicalize(psi, g->site);
        auto t = contract(psi.site(g->site), g->tensor, {{0, 0}}, SectorPolicy::Common);  // (a_l, a_r, t)
        psi.set_site(g->site, transpose(t, {2, 0, 1}));
        continue;
      }
      const std::size_t l = g->site;
      psi = canonicalize(psi, rightward ? l : l + 1);
      auto theta = apply_two_site(contract(psi.site(l), psi.site(l + 1), {{2, 1}}), g->tensor);
      auto svd = block_svd(theta, {0, 1}, {2, 3}, policy);
      w += svd.discarded_weight;
      if (rightward) {
        psi.set_site(l, svd.u);
        psi.set_site(l + 1, transpose(absorb_left(svd.s, svd.v), {1, 0, 2}));
        psi.set_center(l + 1);
      } else {
        psi.set_site(l, absorb_right(svd.u, svd.s));
        psi.set_site(l + 1, transpose(svd.v, {1, 0, 2}));
        psi.set_center(l);
      }
    }
  }
  return {psi, w};
}

std::pair<AsMps, double> hybrid_step(const GateSchedule& sym_gates, const std::optional<AsMpo>& asym_half,
                                     const AsMps& state, const TruncationPolicy& policy) {
  double w = 0.0, wi = 0.0;
  AsMps psi = state;
  if (asym_half) {
    psi = apply_mpo(*asym_half, psi, policy, &wi);
    w += wi;
  }
  auto [mid, wg] = apply_gates(sym_gates, psi, policy);
  psi = std::move(mid);
  w += wg;
  if (asym_half) {
    psi = apply_mpo(*asym_half, psi, policy, &wi);
    w += wi;
  }
  return {psi, w};
}

Trajectory evolve(const EvolutionPlan& plan, const Propagator& prop, const AsMps& initial, const StepCallback& on_step) {
  plan.validate();
  if (plan.scheme == Scheme::Rk4Mpo && !prop.generator) throw InvalidParams("rk4 scheme needs a generator");
  if (plan.scheme == Scheme::HybridTrotter && !prop.gates) throw InvalidParams("hybrid scheme needs gates");
  Trajectory traj;
  traj.density = is_vectorized(initial.spaces());
  for (const auto& o : plan.observables) traj.labels.push_back(o.label);
  std::optional<AsMps> identity;
  if (traj.density) identity = vectorized_identity(physical_spaces(initial.spaces()));

  auto record = [&](int step, const AsMps& psi) {
    TrajectoryRecord r;
    r.step = step;
    r.t = step * plan.dt;
    r.cumulative_truncation = traj.cumulative_truncation;
    double denom = 1.0;
    if (traj.density) {
      r.norm2 = overlap(*identity, psi).real();
      denom = r.norm2;
      r.distribution = number_distribution(psi, &r.odd_weight);
      for (auto& [c, p] : r.distribution) p /= denom;
    } else {
      r.norm2 = norm2(psi);
      denom = r.norm2;
      for (const auto& e : sector_split(psi).entries) r.distribution[e.charge] = e.weight / denom;
    }
    for (const auto& o : plan.observables) {
      if (step % o.interval != 0 && step != plan.n_steps) {
        r.observables[o.label] = std::nullopt;
        continue;
      }
      const cplx v = traj.density ? matrix_element(*identity, o.op, psi) : expectation(psi, o.op);
      r.observables[o.label] = v.real() / denom;
    }
    traj.records.push_back(std::move(r));
  };

  AsMps psi = initial;
  record(0, psi);
  for (int step = 1; step <= plan.n_steps; ++step) {
    double w = 0.0;
    if (plan.scheme == Scheme::Rk4Mpo) {
      std::tie(psi, w) = rk4_step(*prop.generator, psi, plan.dt, plan.policy);
    } else {
      std::tie(psi, w) = hybrid_step(*prop.gates, prop.asym_half, psi, plan.policy);
    }
    traj.cumulative_truncation += w;
    if (traj.cumulative_truncation > plan.max_cumulative_truncation)
      throw TruncationBlowup("cumulative discarded weight " + format_number(traj.cumulative_truncation) +
                             " exceeds the bound");
    if (plan.renormalize == Renormalize::UnitNorm) {
      const double n = norm2(psi);
      if (n > 0) psi = scale(psi, 1.0 / std::sqrt(n));
    } else if (plan.renormalize == Renormalize::UnitTrace) {
      if (!identity) throw InvalidState("unit_trace renormalization needs a density operator");
      const cplx tr = overlap(*identity, psi);
      if (std::abs(tr) > 0) psi = scale(psi, 1.0 / tr);
    }
    if (step % plan.record_interval == 0 || step == plan.n_steps) record(step, psi);
    if (on_step) on_step(step, psi);
  }
  traj.final_state = std::move(psi);
  return traj;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path, const std::string& charge_prefix) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  std::set<Charge> charges;
  for (const auto& r : traj.records)
    for (const auto& [c, p] : r.distribution) charges.insert(c);
  out << "step,t," << (traj.density ? "trace" : "norm2");
  for (const auto& l : traj.labels) out << ',' << l;
  for (Charge c : charges) out << ',' << charge_prefix << c;
  out << ",cumulative_truncation\n";
  for (const auto& r : traj.records) {
    out << r.step << ',' << format_number(r.t) << ',' << format_number(r.norm2);
    for (const auto& l : traj.labels) {
      out << ',';
      auto it = r.observables.find(l);
      if (it != r.observables.end() && it->second) out << format_number(*it->second);
    }
    for (Charge c : charges) {
      auto it = r.distribution.find(c);
      out << ',' << format_number(it == r.distribution.end() ? 0.0 : it->second);
    }
    out << ',' << format_number(r.cumulative_truncation) << '\n';
  }
}

}  // namespace adaptmps
