#pragma once

// Real-time evolution of as-MPS: fourth-order Runge-Kutta built from MPO
// applications, and the second-order hybrid scheme that wraps even/odd
// gate sweeps of the charge-conserving part between two half steps of the
// single-site charge-shifting part.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptmps/models.hpp"

namespace adaptmps {

enum class Scheme { Rk4Mpo, HybridTrotter };
enum class Renormalize { None, UnitNorm, UnitTrace };

// On pure states the value is <psi|O|psi>/<psi|psi>; on vectorized density
// operators it is <identity|O|rho>/tr(rho) with O acting on the vectorized
// chain (see vectorized_observable).
struct Observable {
  std::string label;
  AsMpo op;
  int interval = 1;
};

struct EvolutionPlan {
  Scheme scheme = Scheme::Rk4Mpo;
  double dt = 0.01;
  int n_steps = 1;
  TruncationPolicy policy{};
  std::vector<Observable> observables;
  int record_interval = 1;
  Renormalize renormalize = Renormalize::None;
  double max_cumulative_truncation = 1e-3;

  void validate() const;
};

// Inputs for either scheme. rk4 uses `generator`; hybrid uses `gates`
// (built for the full dt) and `asym_half` = exp(G_a dt/2).
struct Propagator {
  std::optional<AsMpo> generator;
  std::optional<GateSchedule> gates;
  std::optional<AsMpo> asym_half;
};

Propagator rk4_propagator(AsMpo generator);
// Unitary dynamics: gates from -i*H terms, no asymmetric part.
Propagator unitary_trotter_propagator(const std::vector<LocalSpace>& spaces, const std::vector<LocalTerm>& hamiltonian,
                                      double dt);
// How the vectorized Lindbladian is grouped for the hybrid scheme.
//   SiteLocal:   every single-site term (on-site Hamiltonian and the full
//                edge dissipator) goes into the product-MPO half steps, the
//                bond terms into gates. Each factor preserves the trace.
//   ChargeShift: only the q-shifting jump terms go into the half steps.
enum class LindbladSplit { SiteLocal, ChargeShift };
Propagator lindblad_trotter_propagator(const ModelParams& p, double dt,
                                       LindbladSplit split = LindbladSplit::SiteLocal);

std::pair<AsMps, double> rk4_step(const AsMpo& generator, const AsMps& state, double dt,
                                  const TruncationPolicy& policy);
std::pair<AsMps, double> apply_gates(const GateSchedule& gates, const AsMps& state, const TruncationPolicy& policy);
std::pair<AsMps, double> hybrid_step(const GateSchedule& sym_gates, const std::optional<AsMpo>& asym_half,
                                     const AsMps& state, const TruncationPolicy& policy);

struct TrajectoryRecord {
  int step = 0;
  double t = 0.0;
  double norm2 = 0.0;   // <psi|psi>, or trace for density operators
  std::map<std::string, std::optional<double>> observables;
  std::map<Charge, double> distribution;
  double odd_weight = 0.0;  // density operators only
  double cumulative_truncation = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<std::string> labels;
  bool density = false;
  AsMps final_state;
  double cumulative_truncation = 0.0;
};

// Called after each recorded step (for checkpoints and progress).
using StepCallback = std::function<void(int step, const AsMps& state)>;

Trajectory evolve(const EvolutionPlan& plan, const Propagator& prop, const AsMps& initial,
                  const StepCallback& on_step = {});

// One row per record: step, t, norm (or trace), observables, P columns
// for every charge seen in the run.
void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const std::string& charge_prefix = "P_N=");
std::string format_number(double v);

}  // namespace adaptmps
