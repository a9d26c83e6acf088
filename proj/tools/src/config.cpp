#include <cmath>
#include <fstream>
#include <sstream>

#include "qdswitch/scenario.hpp"

extern const char* const qdswitch_default_config_text;

namespace qdswitch::cli {

namespace {

bool compatible(const json& slot, const json& value) {
  if (slot.is_number()) return value.is_number();
  if (slot.is_boolean()) return value.is_boolean();
  if (slot.is_string()) return value.is_string();
  if (slot.is_array()) {
    if (!value.is_array()) return false;
    for (const auto& v : value) {
      if (!v.is_number()) return false;
    }
    return true;
  }
  return false;
}

std::string describe(const json& v) {
  switch (v.type()) {
    case json::value_t::number_float:
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return "number";
    case json::value_t::boolean: return "boolean";
    case json::value_t::string: return "string";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    default: return "null";
  }
}

}  // namespace

json default_config() { return json::parse(qdswitch_default_config_text); }

void merge_config(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) {
    throw ConfigError(where.empty() ? "configuration must be a JSON object"
                                    : "'" + where + "' must be an object");
  }
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
    json& slot = base[key];
    if (slot.is_object()) {
      merge_config(slot, value, path);
      continue;
    }
    if (!compatible(slot, value)) {
      throw ConfigError("'" + path + "' expects a " + describe(slot) + ", got a " + describe(value));
    }
    slot = value;
  }
}

json load_config(const std::filesystem::path& file) {
  json config = default_config();
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read configuration file " + file.string());
  json user;
  try {
    user = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration " + file.string() + " is not valid JSON: " + e.what());
  }
  merge_config(config, user);
  return config;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json* node = &config;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown configuration key '" + path + "'");
    }
    node = &(*node)[part];
  }
  if (node->is_object()) throw ConfigError("'" + path + "' is a section, not a value");

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  if (!compatible(*node, value)) {
    throw ConfigError("'" + path + "' expects a " + describe(*node) + ", got '" + text + "'");
  }
  *node = value;
}

DeviceParams device_from_config(const json& config) {
  const json& d = config.at("device");
  DeviceParams p;
  p.g = d.at("g").get<double>();
  p.kappa = d.at("kappa").get<double>();
  p.kappa_par = d.at("kappa_par").get<double>();
  p.gamma = d.at("gamma").get<double>();
  p.gamma_d = d.at("gamma_d").get<double>();
  p.eta = d.at("eta").get<double>();
  const double nm = d.at("wavelength_nm").get<double>();
  if (!(nm > 0.0)) throw ConfigError("device.wavelength_nm must be > 0");
  p.omega_cav = wavelength_to_thz(nm * 1e-9);
  p = p.with_qd_detuning(d.at("qd_detuning_ghz").get<double>());
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("device: ") + e.what());
  }
  return p;
}

TuningModel tuning_from_config(const json& config) {
  const json& t = config.at("tuning");
  TuningModel m;
  m.t_resonance = t.at("t_resonance").get<double>();
  m.qd_slope = t.at("qd_slope").get<double>();
  m.cav_slope = t.at("cav_slope").get<double>();
  m.t_min = t.at("t_min").get<double>();
  m.t_max = t.at("t_max").get<double>();
  try {
    m.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("tuning: ") + e.what());
  }
  return m;
}

}  // namespace qdswitch::cli
