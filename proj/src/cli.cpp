#include "adaptmps/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "adaptmps/kernels.hpp"
#include "adaptmps/serialize.hpp"

namespace adaptmps::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kModelKeys{"model", "l",  "gamma", "delta",   "h",       "j_xy",  "j",
                                       "u",     "d",  "lambda1", "lambdaL", "nbar1", "nbarL"};

void check_keys(const json& block, const std::set<std::string>& allowed, const std::string& where) {
  if (!block.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : block.items())
    if (!allowed.count(k)) throw ConfigError("unknown field '" + k + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<LocalSpace> physical_chain(const ModelSpec& m) {
  return m.name == "xyz" ? spin_chain(m.params.L) : boson_chain(m.params.L, m.params.d);
}

AsMpo hamiltonian(const ModelSpec& m) {
  if (m.name == "xyz") return mpo_xyz(m.params);
  return mpo_bose_hubbard(m.params);
}

Charge default_sector(const ModelSpec& m) { return static_cast<Charge>(m.params.L / 2); }

json output_block(const json& cfg) { return cfg.contains("output") ? cfg.at("output") : json::object(); }

fs::path prepare_output(const json& cfg) {
  const json out = output_block(cfg);
  check_keys(out, {"directory", "record_interval", "checkpoint_interval"}, "output");
  fs::path dir = get_or<std::string>(out, "directory", "out");
  fs::create_directories(dir);
  return dir;
}

std::uint64_t seed_of(const json& cfg) { return get_or<std::uint64_t>(cfg, "seed", 1); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TruncationPolicy policy_of(const json& block, double default_tol) {
  return {get_or<int>(block, "max_bond", 64), get_or<double>(block, "svd_tolerance", default_tol)};
}

// Ground state of a model block with an optional "sector" and DMRG fields.
AsMps ground_state_of(const json& block, std::uint64_t seed, std::ostream* progress, ModelSpec* spec_out = nullptr) {
  json model = json::object(), dmrg = json::object();
  std::optional<Charge> sector;
  for (const auto& [k, v] : block.items()) {
    if (kModelKeys.count(k))
      model[k] = v;
    else if (k == "sector")
      sector = v.get<Charge>();
    else
      dmrg[k] = v;
  }
  auto spec = parse_model(model);
  if (spec.name == "lindblad_bh") spec.name = "bose_hubbard";
  auto opts = parse_dmrg(dmrg);
  std::mt19937_64 rng(seed);
  auto init = random_state(physical_chain(spec), {sector.value_or(default_sector(spec))}, std::min(opts.max_bond, 8), rng);
  SweepCallback cb;
  if (progress) cb = [&](const SweepRecord& r) { *progress << to_json_line(r) << '\n'; };
  auto res = ground_state(hamiltonian(spec), init, opts, cb);
  if (spec_out) *spec_out = spec;
  return res.state;
}

AsMps resolve_initial(const json& cfg, const ModelSpec& spec, const json& default_gs, std::ostream* progress,
                      double* t_start) {
  const auto seed = seed_of(cfg);
  const json init = cfg.contains("initial") ? cfg.at("initial") : json{{"ground_state_of", default_gs}};
  if (!init.is_object() || init.size() != 1) throw ConfigError("initial must hold exactly one entry");
  const auto& [kind, value] = *init.items().begin();
  if (kind == "product") {
    auto charges = value.get<std::vector<Charge>>();
    auto spaces = physical_chain(spec);
    if (charges.size() != spaces.size()) throw ConfigError("product state length differs from the model");
    std::vector<int> config;
    for (std::size_t l = 0; l < spaces.size(); ++l) {
      const auto& st = spaces[l].states(charges[l]);
      if (st.empty()) throw ConfigError("charge " + std::to_string(charges[l]) + " not available on a site");
      config.push_back(st.front());
    }
    return basis_state(spaces, config);
  }
  if (kind == "random") {
    check_keys(value, {"sector", "max_bond"}, "initial.random");
    std::mt19937_64 rng(seed);
    return random_state(physical_chain(spec), {get_or<Charge>(value, "sector", default_sector(spec))},
                        get_or<int>(value, "max_bond", 8), rng);
  }
  if (kind == "ground_state_of") return ground_state_of(value, seed, progress);
  if (kind == "checkpoint") {
    const auto path = value.get<std::string>();
    if (!fs::exists(path)) throw ConfigError("checkpoint " + path + " does not exist");
    std::ifstream in(path);
    json j;
    in >> j;
    if (t_start) *t_start = j.value("t", 0.0);
    return mps_from_json(j);
  }
  throw ConfigError("unknown initial-state kind '" + kind + "'");
}

Renormalize parse_renormalize(const std::string& s) {
  if (s == "none") return Renormalize::None;
  if (s == "unit_norm") return Renormalize::UnitNorm;
  if (s == "unit_trace") return Renormalize::UnitTrace;
  throw ConfigError("renormalize must be none, unit_norm or unit_trace");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "rk4_mpo") return Scheme::Rk4Mpo;
  if (s == "hybrid_trotter") return Scheme::HybridTrotter;
  throw ConfigError("scheme must be rk4_mpo or hybrid_trotter");
}

EvolutionPlan parse_plan(const json& block, const json& cfg, Renormalize default_renorm, double default_tol) {
  EvolutionPlan plan;
  plan.scheme = parse_scheme(get_or<std::string>(block, "scheme", "rk4_mpo"));
  plan.dt = get_or<double>(block, "dt", 0.01);
  if (block.contains("n_steps") && block.contains("t_final")) throw ConfigError("give n_steps or t_final, not both");
  if (block.contains("t_final"))
    plan.n_steps = static_cast<int>(std::lround(block.at("t_final").get<double>() / plan.dt));
  else
    plan.n_steps = get_or<int>(block, "n_steps", 100);
  plan.policy = policy_of(block, default_tol);
  plan.renormalize = block.contains("renormalize") ? parse_renormalize(block.at("renormalize").get<std::string>())
                                                   : default_renorm;
  plan.max_cumulative_truncation = get_or<double>(block, "max_cumulative_truncation", 1e-3);
  plan.record_interval = get_or<int>(output_block(cfg), "record_interval", 1);
  plan.validate();
  return plan;
}

void only_one_algorithm(const json& cfg, const std::string& expected) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(cfg, {"model", "gs", "quench", "lindblad", "initial", "output", "seed"}, "config");
  int n = 0;
  for (const char* k : {"gs", "quench", "lindblad"}) n += cfg.contains(k) ? 1 : 0;
  if (n != 1) throw ConfigError("config needs exactly one algorithm block");
  if (!cfg.contains(expected)) throw ConfigError("config has no '" + expected + "' block");
  if (!cfg.contains("model")) throw ConfigError("config has no model block");
}

StepCallback checkpointer(const json& cfg, const fs::path& dir, double dt, double t_start) {
  const int every = get_or<int>(output_block(cfg), "checkpoint_interval", 0);
  if (every <= 0) return {};
  return [=](int step, const AsMps& state) {
    if (step % every != 0) return;
    auto j = mps_to_json(state);
    j["step"] = step;
    j["t"] = t_start + step * dt;
    write_json(dir / "checkpoint.json", j);
  };
}

void write_sidecar(const fs::path& path, const std::string& command, const json& cfg, const Trajectory& traj,
                   const EvolutionPlan& plan) {
  json cols = json::array();
  for (const auto& l : traj.labels) cols.push_back(l);
  write_json(path, {{"command", command},
                    {"config", cfg},
                    {"dt", plan.dt},
                    {"n_steps", plan.n_steps},
                    {"records", traj.records.size()},
                    {"observables", cols},
                    {"cumulative_truncation", traj.cumulative_truncation},
                    {"final_max_bond", traj.final_state.max_bond()}});
}

void report_records(const Trajectory& traj, std::ostream* progress) {
  if (!progress) return;
  for (const auto& r : traj.records)
    *progress << json{{"step", r.step}, {"t", r.t}, {"norm", r.norm2}, {"truncation", r.cumulative_truncation}}.dump()
              << '\n';
}

}  // namespace

ModelSpec parse_model(const json& block) {
  check_keys(block, kModelKeys, "model");
  ModelSpec m;
  m.name = get_or<std::string>(block, "model", "");
  auto& p = m.params;
  p.L = get_or<std::size_t>(block, "l", 0);
  p.j_xy = get_or<double>(block, "j_xy", 1.0);
  p.gamma = get_or<double>(block, "gamma", 0.0);
  p.delta = get_or<double>(block, "delta", 0.0);
  p.h = get_or<double>(block, "h", 0.0);
  p.j = get_or<double>(block, "j", 1.0);
  p.u = get_or<double>(block, "u", 0.0);
  p.d = get_or<int>(block, "d", 2);
  p.lambda1 = get_or<double>(block, "lambda1", 0.0);
  p.lambdaL = get_or<double>(block, "lambdaL", 0.0);
  p.nbar1 = get_or<double>(block, "nbar1", 0.0);
  p.nbarL = get_or<double>(block, "nbarL", 0.0);
  if (m.name == "xyz")
    p.validate_spin();
  else if (m.name == "bose_hubbard")
    p.validate_boson();
  else if (m.name == "lindblad_bh")
    p.validate_lindblad();
  else
    throw ConfigError("model must be xyz, bose_hubbard or lindblad_bh");
  return m;
}

DmrgOptions parse_dmrg(const json& block) {
  check_keys(block, {"max_bond", "svd_tolerance", "max_sweeps", "energy_tolerance", "lanczos_max_iterations",
                     "lanczos_tolerance"},
             "gs");
  DmrgOptions o;
  o.max_bond = get_or<int>(block, "max_bond", o.max_bond);
  o.svd_tolerance = get_or<double>(block, "svd_tolerance", o.svd_tolerance);
  o.max_sweeps = get_or<int>(block, "max_sweeps", o.max_sweeps);
  o.energy_tolerance = get_or<double>(block, "energy_tolerance", o.energy_tolerance);
  o.eigensolver.max_iterations = get_or<int>(block, "lanczos_max_iterations", o.eigensolver.max_iterations);
  o.eigensolver.residual_tolerance = get_or<double>(block, "lanczos_tolerance", o.eigensolver.residual_tolerance);
  try {
    o.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  return o;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
}

json run_gs(const json& cfg, std::ostream* progress) {
  only_one_algorithm(cfg, "gs");
  auto spec = parse_model(cfg.at("model"));
  if (spec.name == "lindblad_bh") throw ConfigError("gs needs a Hermitian model (xyz or bose_hubbard)");
  auto opts = parse_dmrg(cfg.at("gs"));
  const auto dir = prepare_output(cfg);
  AsMps init;
  if (cfg.contains("initial")) {
    init = resolve_initial(cfg, spec, json::object(), progress, nullptr);
  } else {
    std::mt19937_64 rng(seed_of(cfg));
    init = random_state(physical_chain(spec), {default_sector(spec)}, std::min(opts.max_bond, 8), rng);
  }
  SweepCallback cb;
  if (progress) cb = [&](const SweepRecord& r) { *progress << to_json_line(r) << '\n'; };
  auto res = ground_state(hamiltonian(spec), init, opts, cb);

  json history = json::array();
  for (const auto& r : res.history)
    history.push_back(json::parse(to_json_line(r)));
  json energy{{"E", res.energy},
              {"sweeps", res.history.size()},
              {"max_bond", res.state.max_bond()},
              {"converged", res.converged},
              {"history", history}};
  write_json(dir / "energy.json", energy);

  std::ofstream pn(dir / "pn.csv");
  const bool spin = spec.name == "xyz";
  pn << (spin ? "charge,sz_total,weight\n" : "n,weight\n");
  const double total = norm2(res.state);
  for (const auto& e : sector_split(res.state).entries) {
    pn << e.charge << ',';
    if (spin) pn << 2 * e.charge - static_cast<Charge>(spec.params.L) << ',';
    pn << format_number(e.weight / total) << '\n';
  }
  save_mps(res.state, (dir / "state.json").string(), {opts.max_bond, opts.svd_tolerance});
  return {{"E", res.energy}, {"converged", res.converged}, {"directory", dir.string()}};
}

json run_quench(const json& cfg, std::ostream* progress) {
  only_one_algorithm(cfg, "quench");
  auto spec = parse_model(cfg.at("model"));
  if (spec.name != "xyz") throw ConfigError("quench needs an xyz model");
  json block = cfg.at("quench");
  check_keys(block, {"scheme", "dt", "n_steps", "t_final", "max_bond", "svd_tolerance", "renormalize",
                     "max_cumulative_truncation", "pre"},
             "quench");
  auto plan = parse_plan(block, cfg, Renormalize::None, 1e-14);
  const auto dir = prepare_output(cfg);

  // pre-quench model: the post-quench block with "pre" overrides (gamma 0 by default)
  json pre = cfg.at("model");
  pre["gamma"] = 0.0;
  if (block.contains("pre"))
    for (const auto& [k, v] : block.at("pre").items()) pre[k] = v;
  pre["sector"] = default_sector(spec);
  double t_start = 0.0;
  auto psi = resolve_initial(cfg, spec, pre, progress, &t_start);

  const auto spaces = spin_chain(spec.params.L);
  for (std::size_t l = 0; l < spec.params.L; ++l)
    plan.observables.push_back({"sz_" + std::to_string(l), mpo_site(spaces, l, ops::sigma_z()), 1});
  plan.observables.push_back({"parity", mpo_parity(spec.params.L), 1});
  Propagator prop = plan.scheme == Scheme::Rk4Mpo
                        ? rk4_propagator(scale(mpo_xyz(spec.params), cplx(0, -1)))
                        : unitary_trotter_propagator(spaces, xyz_terms(spec.params), plan.dt);
  auto traj = evolve(plan, prop, psi, checkpointer(cfg, dir, plan.dt, t_start));
  report_records(traj, progress);

  // sector columns in total S^z = 2N - L
  Trajectory shown = traj;
  for (auto& r : shown.records) {
    r.t += t_start;
    std::map<Charge, double> sz;
    for (const auto& [c, w] : r.distribution) sz[2 * c - static_cast<Charge>(spec.params.L)] = w;
    r.distribution = std::move(sz);
  }
  write_trajectory_csv(shown, (dir / "trajectory.csv").string(), "P_Sz=");
  write_sidecar(dir / "trajectory.json", "quench", cfg, traj, plan);
  save_mps(traj.final_state, (dir / "state.json").string(), plan.policy);
  return {{"records", traj.records.size()}, {"directory", dir.string()}};
}

json run_lindblad(const json& cfg, std::ostream* progress) {
  only_one_algorithm(cfg, "lindblad");
  auto spec = parse_model(cfg.at("model"));
  if (spec.name != "lindblad_bh") throw ConfigError("lindblad needs a lindblad_bh model");
  json block = cfg.at("lindblad");
  check_keys(block, {"scheme", "dt", "n_steps", "t_final", "max_bond", "svd_tolerance", "renormalize",
                     "max_cumulative_truncation", "split"},
             "lindblad");
  auto plan = parse_plan(block, cfg, Renormalize::UnitTrace, 0.0);
  const std::string split = get_or<std::string>(block, "split", "site_local");
  if (split != "site_local" && split != "charge_shift") throw ConfigError("split must be site_local or charge_shift");
  const auto dir = prepare_output(cfg);

  json gs = cfg.at("model");
  gs["model"] = "bose_hubbard";
  for (const char* k : {"lambda1", "lambdaL", "nbar1", "nbarL"}) gs.erase(k);
  gs["sector"] = default_sector(spec);
  double t_start = 0.0;
  AsMps rho;
  if (cfg.contains("initial") && cfg.at("initial").contains("checkpoint")) {
    rho = resolve_initial(cfg, spec, gs, progress, &t_start);
    if (!is_vectorized(rho.spaces())) throw ConfigError("lindblad checkpoint must hold a density operator");
  } else {
    rho = vectorize_pure(resolve_initial(cfg, spec, gs, progress, nullptr));
  }

  const auto phys = boson_chain(spec.params.L, spec.params.d);
  for (std::size_t l = 0; l < spec.params.L; ++l)
    plan.observables.push_back(
        {"n_" + std::to_string(l), vectorized_observable(phys, {{l, ops::boson_number(spec.params.d)}}), 1});
  Propagator prop;
  if (plan.scheme == Scheme::Rk4Mpo) {
    auto [sym, asym] = lindblad_mpo(spec.params);
    prop = rk4_propagator(asym.is_zero() ? sym : add_mpo(sym, asym));
  } else {
    prop = lindblad_trotter_propagator(spec.params, plan.dt,
                                       split == "site_local" ? LindbladSplit::SiteLocal : LindbladSplit::ChargeShift);
  }
  auto traj = evolve(plan, prop, rho, checkpointer(cfg, dir, plan.dt, t_start));
  report_records(traj, progress);
  Trajectory shown = traj;
  for (auto& r : shown.records) r.t += t_start;
  write_trajectory_csv(shown, (dir / "trajectory.csv").string(), "P_N=");
  write_sidecar(dir / "trajectory.json", "lindblad", cfg, traj, plan);
  save_mps(traj.final_state, (dir / "state.json").string(), plan.policy);
  return {{"records", traj.records.size()}, {"directory", dir.string()}};
}

int configure_threads(int requested) {
  int n = requested;
  if (const char* env = std::getenv("ADAPTMPS_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("ADAPTMPS_THREADS must be an integer");
    }
  }
  if (n > 0) {
    kernels::set_num_threads(n);
    kernels::set_execution(n > 1 ? kernels::Execution::Parallel : kernels::Execution::Serial);
  }
  return kernels::num_threads();
}

}  // namespace adaptmps::cli
