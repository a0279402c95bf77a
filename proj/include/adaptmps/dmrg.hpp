#pragma once

// Two-site ground-state search. The leftmost bond of the state is widened
// to every total charge the operator can reach from the initial charges, so
// sectors appear and disappear as the sweeps proceed.

#include <functional>
#include <string>
#include <vector>

#include "adaptmps/environment.hpp"
#include "adaptmps/mps.hpp"

namespace adaptmps {

struct LanczosOptions {
  int max_iterations = 200;
  double residual_tolerance = 1e-10;
};

struct DmrgOptions {
  int max_bond = 64;
  double svd_tolerance = 1e-14;
  int max_sweeps = 30;
  double energy_tolerance = 1e-10;
  LanczosOptions eigensolver;

  void validate() const;
};

struct SweepRecord {
  int sweep = 0;
  double energy = 0.0;
  int max_bond = 0;
  double discarded_weight = 0.0;
};
std::string to_json_line(const SweepRecord& r);

struct DmrgResult {
  double energy = 0.0;
  AsMps state;
  std::vector<SweepRecord> history;
  bool converged = false;
};

using SweepCallback = std::function<void(const SweepRecord&)>;

struct LanczosResult {
  double value = 0.0;
  SymTensor vector;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Lowest eigenpair of a Hermitian linear map on SymTensors with the legs of
// `start`, with full reorthogonalization.
LanczosResult lanczos(const std::function<SymTensor(const SymTensor&)>& apply, const SymTensor& start,
                      const LanczosOptions& opts);

// Two-site tensor legs: (sigma_l Out, a_l In, sigma_{l+1} Out, a_{l+2} Out).
SymTensor effective_apply(const EnvTensor& env_left, const SymTensor& w_l, const SymTensor& w_l1,
                          const EnvTensor& env_right, const SymTensor& x);
// One-site tensor legs: (sigma Out, a_l In, a_{l+1} Out).
SymTensor effective_apply_single(const EnvTensor& env_left, const SymTensor& w, const EnvTensor& env_right,
                                 const SymTensor& x);

// Charges reachable from `initial` by repeatedly adding operator shifts,
// limited to the totals the chain can hold.
std::vector<Charge> reachable_charges(const std::vector<LocalSpace>& spaces, const std::vector<Charge>& initial,
                                      const std::vector<Charge>& shifts);

DmrgResult ground_state(const AsMpo& op, const AsMps& initial, const DmrgOptions& opts,
                        const SweepCallback& on_sweep = {});

}  // namespace adaptmps
