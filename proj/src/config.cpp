#include "bcfb/config.hpp"

#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"

namespace bcfb {
namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": top level must be an object");
  return doc;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError(context + ": unknown key '" + key + "'");
}

Real require_number(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(context + ": '" + key + "' must be a number");
  return obj[key].get<Real>();
}

int require_int(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  if (!obj[key].is_number_integer()) throw ConfigError(context + ": '" + key + "' must be an integer");
  return obj[key].get<int>();
}

// Scalar broadcast or per-user list.
template <class T>
std::vector<T> per_user_values(const json& value, int m, const std::string& key,
                               const std::string& context) {
  std::vector<T> out;
  if (value.is_array()) {
    if (static_cast<int>(value.size()) != m)
      throw ConfigError(context + ": '" + key + "' must list one value per user");
    for (const json& v : value) {
      if (!v.is_number()) throw ConfigError(context + ": '" + key + "' entries must be numbers");
      out.push_back(v.get<T>());
    }
  } else if (value.is_number()) {
    out.assign(static_cast<std::size_t>(m), value.get<T>());
  } else {
    throw ConfigError(context + ": '" + key + "' must be a number or a list");
  }
  return out;
}

std::vector<Real> snr_grid(const json& value, const std::string& context) {
  if (value.is_number()) return {value.get<Real>()};
  if (!value.is_object())
    throw ConfigError(context + ": 'rho_db' must be a number or {start, stop, step}");
  reject_unknown_keys(value, {"start", "stop", "step"}, context + ": rho_db");
  const Real start = require_number(value, "start", context + ": rho_db");
  const Real stop = require_number(value, "stop", context + ": rho_db");
  const Real step = require_number(value, "step", context + ": rho_db");
  if (!(step > 0.0)) throw ConfigError(context + ": rho_db step must be > 0");
  if (stop < start) throw ConfigError(context + ": rho_db stop must be >= start");
  std::vector<Real> grid;
  for (Real v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
  return grid;
}

}  // namespace

ExperimentSpec load_experiment_config(const std::filesystem::path& path) {
  const std::string context = path.string();
  json doc = parse_file(path);
  reject_unknown_keys(doc,
                      {"L", "m", "rho_db", "gamma", "rate_bits", "schemes", "trials",
                       "codebook_redraws", "seed"},
                      context);

  ExperimentSpec spec;
  spec.L = require_int(doc, "L", context);
  spec.m = require_int(doc, "m", context);
  if (spec.L < 1 || spec.m < 1) throw ConfigError(context + ": L and m must be >= 1");
  if (!doc.contains("rho_db")) throw ConfigError(context + ": missing key 'rho_db'");
  spec.snr_grid_db = snr_grid(doc["rho_db"], context);

  spec.gamma = doc.contains("gamma")
                   ? per_user_values<Real>(doc["gamma"], spec.m, "gamma", context)
                   : std::vector<Real>(static_cast<std::size_t>(spec.m), 1.0);
  spec.rate_bits = doc.contains("rate_bits")
                       ? per_user_values<int>(doc["rate_bits"], spec.m, "rate_bits", context)
                       : std::vector<int>(static_cast<std::size_t>(spec.m), 0);

  if (doc.contains("schemes")) {
    if (!doc["schemes"].is_array()) throw ConfigError(context + ": 'schemes' must be a list");
    for (const json& tag : doc["schemes"]) {
      if (!tag.is_string()) throw ConfigError(context + ": scheme tags must be strings");
      try {
        spec.schemes.push_back(SchemeTag::parse(tag.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(context + ": " + e.what());
      }
    }
  } else {
    spec.schemes = {SchemeTag{SchemeKind::MainOrder, 0}};
  }

  if (doc.contains("trials")) spec.trials = require_int(doc, "trials", context);
  if (doc.contains("codebook_redraws"))
    spec.codebook_redraws = require_int(doc, "codebook_redraws", context);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw ConfigError(context + ": 'seed' must be an integer");
    spec.master_seed = doc["seed"].get<std::uint64_t>();
  }

  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(context + ": " + e.what());
  }
  return spec;
}

EtaClassFile load_eta_classes(const std::filesystem::path& path) {
  const std::string context = path.string();
  json doc = parse_file(path);
  reject_unknown_keys(doc, {"rho_db", "classes"}, context);
  EtaClassFile out;
  out.rho = db_to_linear(require_number(doc, "rho_db", context));
  if (!doc.contains("classes") || !doc["classes"].is_array() || doc["classes"].empty())
    throw ConfigError(context + ": 'classes' must be a nonempty list");
  for (const json& entry : doc["classes"]) {
    if (!entry.is_object()) throw ConfigError(context + ": class entries must be objects");
    reject_unknown_keys(entry, {"fraction", "gamma", "rbar"}, context + ": class");
    EtaClass c;
    c.fraction = require_number(entry, "fraction", context + ": class");
    c.gamma = require_number(entry, "gamma", context + ": class");
    if (!entry.contains("rbar")) throw ConfigError(context + ": class: missing key 'rbar'");
    if (entry["rbar"].is_string()) {
      if (entry["rbar"].get<std::string>() != "inf")
        throw ConfigError(context + ": class: 'rbar' string form must be \"inf\"");
      c.rbar = std::numeric_limits<Real>::infinity();
    } else if (entry["rbar"].is_number()) {
      c.rbar = entry["rbar"].get<Real>();
    } else {
      throw ConfigError(context + ": class: 'rbar' must be a number or \"inf\"");
    }
    out.classes.push_back(c);
  }
  return out;
}

}  // namespace bcfb
