#pragma once

// Experiment runner behind the command-line tool. Configs are JSON:
//   {"model": {"model": "xyz" | "bose_hubbard" | "lindblad_bh", "l": ..., ...},
//    "gs" | "quench" | "lindblad": {...},
//    "initial": {"product": [...]} | {"random": {...}} |
//               {"ground_state_of": {...}} | {"checkpoint": "path"},
//    "output": {"directory": "...", "record_interval": n, "checkpoint_interval": n},
//    "seed": n}

#include <json.hpp>
#include <ostream>
#include <string>

#include "adaptmps/dmrg.hpp"
#include "adaptmps/tevo.hpp"

namespace adaptmps::cli {

struct ModelSpec {
  std::string name;  // xyz, bose_hubbard, lindblad_bh
  ModelParams params;
};

ModelSpec parse_model(const nlohmann::json& block);
DmrgOptions parse_dmrg(const nlohmann::json& block);
nlohmann::json load_config(const std::string& path);

// Every run returns a JSON summary of what it wrote. Per-sweep and
// per-record progress lines go to `progress` when it is non-null.
nlohmann::json run_gs(const nlohmann::json& config, std::ostream* progress = nullptr);
nlohmann::json run_quench(const nlohmann::json& config, std::ostream* progress = nullptr);
nlohmann::json run_lindblad(const nlohmann::json& config, std::ostream* progress = nullptr);

enum class Level { Fast, Full };
// Oracle-equivalence and invariant checks. Each entry carries suite, name,
// measured error, tolerance and pass flag; "passed" is the conjunction.
nlohmann::json run_validate(Level level);

// Applies --threads / ADAPTMPS_THREADS (the variable wins when set).
int configure_threads(int requested);

}  // namespace adaptmps::cli
