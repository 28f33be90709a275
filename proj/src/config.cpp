#include "irsdetect/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace irsdetect {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

std::vector<double> get_double_list(const json& obj, const char* key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  if (!obj.at(key).is_array()) {
    throw ConfigError(std::string("key '") + key + "' must be an array");
  }
  for (const auto& v : obj.at(key)) {
    if (!v.is_number()) {
      throw ConfigError(std::string("key '") + key + "' must hold numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

NoiseModel parse_noise(const json& obj) {
  reject_unknown_keys(obj, {"model", "sigma2", "rho", "spread_db"}, "noise");
  const std::string model = get_or<std::string>(obj, "model", "iid");
  if (model == "iid") {
    return IidNoise{get_or<double>(obj, "sigma2", 1.0)};
  }
  if (model == "diagonal") {
    const auto entries = get_double_list(obj, "sigma2");
    if (entries.empty()) {
      throw ConfigError("noise.sigma2: diagonal model needs per-antenna values");
    }
    RealVector sigma2(long(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) sigma2(long(i)) = entries[i];
    return DiagonalNoise{std::move(sigma2)};
  }
  if (model == "correlated") {
    return CorrelatedNoise{get_or<double>(obj, "sigma2", 1.0),
                           get_or<double>(obj, "rho", 0.0)};
  }
  if (model == "uncalibrated") {
    return UncalibratedNoise{get_or<double>(obj, "sigma2", 1.0),
                             get_or<double>(obj, "spread_db", 3.0)};
  }
  throw ConfigError("noise.model: expected iid, diagonal, correlated or uncalibrated");
}

json noise_to_json(const NoiseModel& model) {
  json out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IidNoise>) {
          out = {{"model", "iid"}, {"sigma2", n.sigma2}};
        } else if constexpr (std::is_same_v<T, DiagonalNoise>) {
          std::vector<double> entries(n.sigma2.data(),
                                      n.sigma2.data() + n.sigma2.size());
          out = {{"model", "diagonal"}, {"sigma2", entries}};
        } else if constexpr (std::is_same_v<T, CorrelatedNoise>) {
          out = {{"model", "correlated"}, {"sigma2", n.sigma2}, {"rho", n.rho}};
        } else {
          out = {{"model", "uncalibrated"},
                 {"sigma2", n.sigma2},
                 {"spread_db", n.spread_db}};
        }
      },
      model);
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration document: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("configuration document must be a JSON object");
  }
  reject_unknown_keys(
      doc,
      {"M", "K", "N", "L", "nakagami_m", "reflection_amplitude",
       "power_range_mw", "noise", "direct_mask", "base_seed", "detector",
       "snr_db", "resample_channels", "resample_powers", "signal_real",
       "trials", "target_pfa", "pfa_grid", "sweep_axis", "sweep_values",
       "snr_grid_db"},
      "configuration document");

  RunConfig config;
  SystemConfig& sys = config.scenario.config;
  sys.antennas = get_or<int>(doc, "M", sys.antennas);
  sys.devices = get_or<int>(doc, "K", sys.devices);
  sys.irs_elements = get_or<int>(doc, "N", sys.irs_elements);
  sys.samples = get_or<int>(doc, "L", sys.samples);
  sys.nakagami_m = get_or<double>(doc, "nakagami_m", sys.nakagami_m);
  sys.reflection_amplitude =
      get_or<double>(doc, "reflection_amplitude", sys.reflection_amplitude);
  if (doc.contains("power_range_mw")) {
    const auto range = get_double_list(doc, "power_range_mw");
    if (range.size() != 2) {
      throw ConfigError("power_range_mw: expected [low, high]");
    }
    sys.power_range_mw = {range[0], range[1]};
  }
  if (doc.contains("noise")) {
    if (!doc.at("noise").is_object()) {
      throw ConfigError("noise: expected an object");
    }
    sys.noise = parse_noise(doc.at("noise"));
  }
  if (doc.contains("direct_mask")) {
    if (!doc.at("direct_mask").is_array()) {
      throw ConfigError("direct_mask: expected an array of 0/1 flags");
    }
    sys.direct_mask.clear();
    for (const auto& v : doc.at("direct_mask")) {
      if (!v.is_number_integer()) {
        throw ConfigError("direct_mask: entries must be integers");
      }
      sys.direct_mask.push_back(v.get<int>());
    }
  }
  sys.base_seed = get_or<std::uint64_t>(doc, "base_seed", sys.base_seed);

  config.scenario.detector =
      detector_from_name(get_or<std::string>(doc, "detector", "opt"));
  if (doc.contains("snr_db")) {
    config.scenario.snr_override_db = get_or<double>(doc, "snr_db", 0.0);
  }
  config.scenario.resample_channels_per_trial =
      get_or<bool>(doc, "resample_channels", false);
  config.scenario.resample_powers_per_trial =
      get_or<bool>(doc, "resample_powers", false);
  if (doc.contains("signal_real")) {
    const auto entries = get_double_list(doc, "signal_real");
    Vector s(long(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
      s(long(i)) = Complex(entries[i], 0.0);
    }
    config.scenario.signal = std::move(s);
  }

  config.trials = get_or<long>(doc, "trials", config.trials);
  config.target_pfa = get_or<double>(doc, "target_pfa", config.target_pfa);
  config.pfa_grid = get_double_list(doc, "pfa_grid");
  config.sweep_axis = get_or<std::string>(doc, "sweep_axis", config.sweep_axis);
  config.sweep_values = get_double_list(doc, "sweep_values");
  config.snr_grid_db = get_double_list(doc, "snr_grid_db");

  if (config.trials < 1) throw ConfigError("trials: must be >= 1");
  if (!(config.target_pfa > 0.0 && config.target_pfa < 1.0)) {
    throw ConfigError("target_pfa: must be in (0,1)");
  }
  sys.validate();
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& config) {
  const SystemConfig& sys = config.scenario.config;
  json doc;
  doc["M"] = sys.antennas;
  doc["K"] = sys.devices;
  doc["N"] = sys.irs_elements;
  doc["L"] = sys.samples;
  doc["nakagami_m"] = sys.nakagami_m;
  doc["reflection_amplitude"] = sys.reflection_amplitude;
  doc["power_range_mw"] = {sys.power_range_mw[0], sys.power_range_mw[1]};
  doc["noise"] = noise_to_json(sys.noise);
  if (!sys.direct_mask.empty()) doc["direct_mask"] = sys.direct_mask;
  doc["base_seed"] = sys.base_seed;
  doc["detector"] = detector_name(config.scenario.detector);
  if (config.scenario.snr_override_db.has_value()) {
    doc["snr_db"] = *config.scenario.snr_override_db;
  }
  doc["resample_channels"] = config.scenario.resample_channels_per_trial;
  doc["resample_powers"] = config.scenario.resample_powers_per_trial;
  if (config.scenario.signal.has_value()) {
    std::vector<double> entries;
    for (long i = 0; i < config.scenario.signal->size(); ++i) {
      entries.push_back((*config.scenario.signal)(i).real());
    }
    doc["signal_real"] = entries;
  }
  doc["trials"] = config.trials;
  doc["target_pfa"] = config.target_pfa;
  if (!config.pfa_grid.empty()) doc["pfa_grid"] = config.pfa_grid;
  doc["sweep_axis"] = config.sweep_axis;
  if (!config.sweep_values.empty()) doc["sweep_values"] = config.sweep_values;
  if (!config.snr_grid_db.empty()) doc["snr_grid_db"] = config.snr_grid_db;
  return doc.dump(2);
}

}  // namespace irsdetect
