#include "adaptmps/serialize.hpp"

#include <fstream>

namespace adaptmps {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json conventions() {
  return {{"fusion", "sum(In charges) - sum(Out charges) = 0"},
          {"mps_site", "sigma Out, a_l In, a_l+1 Out"},
          {"mpo_site", "sigma In, tau Out, b_l In, b_l+1 Out"},
          {"right_boundary", "single sector charge 0, dim 1"},
          {"vectorization", "k = n_ket + d * n_bra"}};
}

void check_format(const json& j, const std::string& expected) {
  if (!j.is_object() || j.value("format", "") != expected)
    throw ConfigError("expected a '" + expected + "' document");
  if (j.value("version", 0) != kFormatVersion) throw ConfigError("unsupported " + expected + " version");
}

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

json tensor_to_json(const SymTensor& t) {
  json legs = json::array();
  for (const auto& leg : t.legs()) {
    json sectors = json::array();
    for (const auto& s : leg.sectors()) sectors.push_back({s.charge, s.dim});
    legs.push_back({{"dir", leg.dir() == Dir::In ? "in" : "out"}, {"sectors", sectors}});
  }
  json blocks = json::array();
  for (const auto& [key, b] : t.blocks()) {
    std::vector<double> re, im;
    re.reserve(b.size());
    im.reserve(b.size());
    for (const auto& v : b.data) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    blocks.push_back({{"key", key}, {"shape", b.shape}, {"re", re}, {"im", im}});
  }
  return {{"legs", legs}, {"blocks", blocks}};
}

SymTensor tensor_from_json(const json& j) {
  try {
    std::vector<Leg> legs;
    for (const auto& lj : j.at("legs")) {
      const auto dir = lj.at("dir").get<std::string>();
      if (dir != "in" && dir != "out") throw ConfigError("leg dir must be 'in' or 'out'");
      std::vector<Sector> sectors;
      for (const auto& s : lj.at("sectors")) sectors.push_back({s.at(0).get<Charge>(), s.at(1).get<int>()});
      legs.emplace_back(dir == "in" ? Dir::In : Dir::Out, std::move(sectors));
    }
    BlockMap blocks;
    for (const auto& bj : j.at("blocks")) {
      auto re = bj.at("re").get<std::vector<double>>();
      auto im = bj.at("im").get<std::vector<double>>();
      if (re.size() != im.size()) throw ShapeMismatch("re/im lengths differ");
      std::vector<cplx> data(re.size());
      for (std::size_t i = 0; i < re.size(); ++i) data[i] = {re[i], im[i]};
      blocks.emplace(bj.at("key").get<Key>(), Block(bj.at("shape").get<std::vector<int>>(), std::move(data)));
    }
    return make_tensor(std::move(legs), std::move(blocks));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed tensor record: ") + e.what());
  }
}

json space_to_json(const LocalSpace& s) {
  return {{"kind", s.kind()}, {"base_dim", s.base_dim()}, {"charges", s.charges()}};
}

LocalSpace space_from_json(const json& j) {
  return LocalSpace(required<std::string>(j, "kind"), required<std::vector<Charge>>(j, "charges"),
                    j.value("base_dim", 0));
}

json mps_to_json(const AsMps& psi, const TruncationPolicy& policy) {
  json spaces = json::array(), sites = json::array();
  for (const auto& s : psi.spaces()) spaces.push_back(space_to_json(s));
  for (const auto& t : psi.sites()) sites.push_back(tensor_to_json(t));
  json center = psi.center() ? json(*psi.center()) : json(nullptr);
  return {{"format", "adaptmps-mps"},
          {"version", kFormatVersion},
          {"length", psi.length()},
          {"conventions", conventions()},
          {"center", center},
          {"policy", {{"max_bond", policy.max_bond}, {"tolerance", policy.tolerance}}},
          {"spaces", spaces},
          {"sites", sites}};
}

AsMps mps_from_json(const json& j) {
  check_format(j, "adaptmps-mps");
  const auto L = required<std::size_t>(j, "length");
  std::vector<LocalSpace> spaces;
  std::vector<SymTensor> sites;
  for (const auto& s : j.at("spaces")) spaces.push_back(space_from_json(s));
  for (const auto& t : j.at("sites")) sites.push_back(tensor_from_json(t));
  if (spaces.size() != L || sites.size() != L) throw LengthMismatch("checkpoint length does not match its records");
  std::optional<std::size_t> center;
  if (j.contains("center") && !j.at("center").is_null()) center = j.at("center").get<std::size_t>();
  AsMps psi(std::move(spaces), std::move(sites), center);
  if (center && canonical_error(psi) > 1e-8) throw InvalidState("checkpoint is not canonical at its recorded center");
  return psi;
}

json mpo_to_json(const AsMpo& op) {
  json spaces = json::array(), sites = json::array();
  for (const auto& s : op.spaces()) spaces.push_back(space_to_json(s));
  for (const auto& t : op.sites()) sites.push_back(tensor_to_json(t));
  return {{"format", "adaptmps-mpo"}, {"version", kFormatVersion}, {"length", op.length()},
          {"conventions", conventions()}, {"spaces", spaces}, {"sites", sites}};
}

AsMpo mpo_from_json(const json& j) {
  check_format(j, "adaptmps-mpo");
  const auto L = required<std::size_t>(j, "length");
  std::vector<LocalSpace> spaces;
  std::vector<SymTensor> sites;
  for (const auto& s : j.at("spaces")) spaces.push_back(space_from_json(s));
  for (const auto& t : j.at("sites")) sites.push_back(tensor_from_json(t));
  if (spaces.size() != L || sites.size() != L) throw LengthMismatch("document length does not match its records");
  return AsMpo(std::move(spaces), std::move(sites));
}

void save_mps(const AsMps& psi, const std::string& path, const TruncationPolicy& policy) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << mps_to_json(psi, policy).dump() << '\n';
}

AsMps load_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint " + path + ": " + e.what());
  }
  return mps_from_json(j);
}

}  // namespace adaptmps
