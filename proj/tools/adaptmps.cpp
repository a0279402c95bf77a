// Command-line front end: gs / quench / lindblad runs from JSON configs and
// the validation suite.

#include <CLI11.hpp>
#include <iostream>

#include "adaptmps/cli.hpp"
#include "adaptmps/errors.hpp"
#include "adaptmps/symtensor.hpp"

namespace {

using adaptmps::cli::Level;

int run(const std::function<nlohmann::json()>& body) {
  try {
    std::cout << body().dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-adaptive MPS ground states and time evolution"};
  app.require_subcommand(1);
  int threads = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "Cap on worker threads (ADAPTMPS_THREADS wins when set)")->check(CLI::NonNegativeNumber);
  app.add_flag("-q,--quiet", quiet, "Suppress progress lines on stderr");

  std::string config_path;
  auto* gs = app.add_subcommand("gs", "DMRG ground state");
  auto* quench = app.add_subcommand("quench", "Ground state followed by a quench");
  auto* lindblad = app.add_subcommand("lindblad", "Vectorized Lindblad evolution");
  for (auto* sub : {gs, quench, lindblad})
    sub->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "Oracle-equivalence and invariant checks");
  std::string level = "fast";
  std::string mutate;
  validate->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  validate->add_option("--mutate", mutate, "Deliberately break a check (fusion)")->check(CLI::IsMember({"fusion"}));

  CLI11_PARSE(app, argc, argv);

  try {
    adaptmps::cli::configure_threads(threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::ostream* progress = quiet ? nullptr : &std::cerr;

  if (*gs) return run([&] { return adaptmps::cli::run_gs(adaptmps::cli::load_config(config_path), progress); });
  if (*quench) return run([&] { return adaptmps::cli::run_quench(adaptmps::cli::load_config(config_path), progress); });
  if (*lindblad)
    return run([&] { return adaptmps::cli::run_lindblad(adaptmps::cli::load_config(config_path), progress); });

  if (mutate == "fusion") adaptmps::detail::set_fusion_check_enabled(false);
  const auto report = adaptmps::cli::run_validate(level == "full" ? Level::Full : Level::Fast);
  std::cout << report.dump(2) << "\n";
  return report.at("passed").get<bool>() ? 0 : 1;
}
