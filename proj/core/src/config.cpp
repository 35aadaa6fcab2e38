#include "lumio/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lumio::io {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& origin, const std::string& section) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const auto& a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_error(origin, "unknown key '" + section + key + "'");
    }
  }
}

template <typename T>
void get_if_present(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

void parse_scenario(const json& j, sim::ScenarioConfig& s, const std::string& origin) {
  check_keys(j,
             {"kind", "duration", "imu_rate", "keyframe_rate", "speed", "radius",
              "vo_noise_translation", "vo_noise_rotation", "vo_drift_bias",
              "imu_accel_noise", "imu_gyro_noise", "gnss_rate", "gnss_sigma",
              "gnss_noise_sigma", "brightness", "frame_height", "frame_width", "seed"},
             origin, "sim.");
  if (auto it = j.find("kind"); it != j.end()) {
    s.kind = sim::trajectory_kind_from_string(it->get<std::string>());
  }
  get_if_present(j, "duration", s.duration);
  get_if_present(j, "imu_rate", s.imu_rate);
  get_if_present(j, "keyframe_rate", s.keyframe_rate);
  get_if_present(j, "speed", s.speed);
  get_if_present(j, "radius", s.radius);
  get_if_present(j, "vo_noise_translation", s.vo_noise_translation);
  get_if_present(j, "vo_noise_rotation", s.vo_noise_rotation);
  if (auto it = j.find("vo_drift_bias"); it != j.end()) {
    const auto v = it->get<std::vector<double>>();
    if (v.size() != 6) config_error(origin, "sim.vo_drift_bias must hold 6 numbers");
    s.vo_drift_bias = Twist6(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
  }
  get_if_present(j, "imu_accel_noise", s.imu_accel_noise);
  get_if_present(j, "imu_gyro_noise", s.imu_gyro_noise);
  get_if_present(j, "gnss_rate", s.gnss_rate);
  get_if_present(j, "gnss_sigma", s.gnss_sigma);
  get_if_present(j, "gnss_noise_sigma", s.gnss_noise_sigma);
  get_if_present(j, "brightness", s.brightness);
  get_if_present(j, "frame_height", s.frame_height);
  get_if_present(j, "frame_width", s.frame_width);
  get_if_present(j, "seed", s.seed);
}

void parse_model(const json& j, vonet::ModelConfig& m, const std::string& origin) {
  check_keys(j,
             {"patch", "image_height", "image_width", "model_dim", "layers",
              "brightness_channels", "heads", "ffn_dim", "decoder_hidden",
              "drop_path_rate"},
             origin, "model.");
  get_if_present(j, "patch", m.patch);
  get_if_present(j, "image_height", m.image_height);
  get_if_present(j, "image_width", m.image_width);
  get_if_present(j, "model_dim", m.model_dim);
  get_if_present(j, "layers", m.layers);
  get_if_present(j, "brightness_channels", m.brightness_channels);
  get_if_present(j, "heads", m.heads);
  get_if_present(j, "ffn_dim", m.ffn_dim);
  get_if_present(j, "decoder_hidden", m.decoder_hidden);
  get_if_present(j, "drop_path_rate", m.drop_path_rate);
}

void parse_pgo(const json& j, PgoSettings& p, const std::string& origin) {
  check_keys(j, {"lambda", "sigma_scale", "lm"}, origin, "pgo.");
  get_if_present(j, "lambda", p.lambda);
  get_if_present(j, "sigma_scale", p.sigma_scale);
  if (auto it = j.find("lm"); it != j.end()) {
    check_keys(*it,
               {"max_iterations", "initial_damping", "damping_up", "damping_down",
                "cost_tolerance", "step_tolerance"},
               origin, "pgo.lm.");
    get_if_present(*it, "max_iterations", p.lm.max_iterations);
    get_if_present(*it, "initial_damping", p.lm.initial_damping);
    get_if_present(*it, "damping_up", p.lm.damping_up);
    get_if_present(*it, "damping_down", p.lm.damping_down);
    get_if_present(*it, "cost_tolerance", p.lm.cost_tolerance);
    get_if_present(*it, "step_tolerance", p.lm.step_tolerance);
  }
}

void parse_imu(const json& j, ImuSettings& s, const std::string& origin) {
  check_keys(j, {"gravity_compensation", "gnss"}, origin, "imu.");
  get_if_present(j, "gravity_compensation", s.gravity_compensation);
  if (auto it = j.find("gnss"); it != j.end()) {
    check_keys(*it, {"traj_sigma_rate", "min_traj_sigma"}, origin, "imu.gnss.");
    get_if_present(*it, "traj_sigma_rate", s.gnss_blend.traj_sigma_rate);
    get_if_present(*it, "min_traj_sigma", s.gnss_blend.min_traj_sigma);
  }
}

void parse_eval(const json& j, EvalSettings& e, const std::string& origin) {
  check_keys(j, {"rpe_delta", "segment_lengths", "align", "with_scale", "max_time_offset"},
             origin, "eval.");
  get_if_present(j, "rpe_delta", e.rpe_delta);
  if (auto it = j.find("segment_lengths"); it != j.end()) {
    e.segment_lengths = it->get<std::vector<double>>();
  }
  get_if_present(j, "align", e.align);
  get_if_present(j, "with_scale", e.with_scale);
  get_if_present(j, "max_time_offset", e.max_time_offset);
}

nlohmann::ordered_json scenario_to_json(const sim::ScenarioConfig& s) {
  const Vec6 bias = s.vo_drift_bias.vector();
  return nlohmann::ordered_json{
      {"kind", sim::to_string(s.kind)},
      {"duration", s.duration},
      {"imu_rate", s.imu_rate},
      {"keyframe_rate", s.keyframe_rate},
      {"speed", s.speed},
      {"radius", s.radius},
      {"vo_noise_translation", s.vo_noise_translation},
      {"vo_noise_rotation", s.vo_noise_rotation},
      {"vo_drift_bias", {bias[0], bias[1], bias[2], bias[3], bias[4], bias[5]}},
      {"imu_accel_noise", s.imu_accel_noise},
      {"imu_gyro_noise", s.imu_gyro_noise},
      {"gnss_rate", s.gnss_rate},
      {"gnss_sigma", s.gnss_sigma},
      {"gnss_noise_sigma", s.gnss_noise_sigma},
      {"brightness", s.brightness},
      {"frame_height", s.frame_height},
      {"frame_width", s.frame_width},
      {"seed", s.seed}};
}

}  // namespace

void PipelineConfig::validate() const {
  scenario.validate();
  model.validate();
  pgo.lm.validate();
  if (pgo.lambda < 0.0) throw std::runtime_error("config: pgo.lambda must be >= 0");
  if (!(pgo.sigma_scale > 0.0)) {
    throw std::runtime_error("config: pgo.sigma_scale must be > 0");
  }
  if (eval.rpe_delta < 1) throw std::runtime_error("config: eval.rpe_delta must be >= 1");
  if (!(eval.max_time_offset > 0.0)) {
    throw std::runtime_error("config: eval.max_time_offset must be > 0");
  }
  for (double len : eval.segment_lengths) {
    if (!(len > 0.0)) throw std::runtime_error("config: segment lengths must be > 0");
  }
  if (!(imu.gnss_blend.traj_sigma_rate > 0.0) || !(imu.gnss_blend.min_traj_sigma > 0.0)) {
    throw std::runtime_error("config: imu.gnss rates must be > 0");
  }
}

PipelineConfig parse_config(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const std::exception& e) {
    config_error(origin, e.what());
  }
  if (!doc.is_object()) config_error(origin, "top level must be an object");
  check_keys(doc, {"version", "sim", "model", "pgo", "imu", "eval"}, origin, "");
  if (auto it = doc.find("version"); it == doc.end()) {
    config_error(origin, "missing 'version'");
  } else if (it->get<int>() != 1) {
    config_error(origin, "unsupported version " + it->dump());
  }

  PipelineConfig cfg;
  try {
    if (auto it = doc.find("sim"); it != doc.end()) parse_scenario(*it, cfg.scenario, origin);
    if (auto it = doc.find("model"); it != doc.end()) parse_model(*it, cfg.model, origin);
    if (auto it = doc.find("pgo"); it != doc.end()) parse_pgo(*it, cfg.pgo, origin);
    if (auto it = doc.find("imu"); it != doc.end()) parse_imu(*it, cfg.imu, origin);
    if (auto it = doc.find("eval"); it != doc.end()) parse_eval(*it, cfg.eval, origin);
  } catch (const json::exception& e) {
    config_error(origin, e.what());
  } catch (const std::invalid_argument& e) {
    config_error(origin, e.what());
  }

  // One gravity switch drives both the generator and the integrator.
  if (doc.contains("imu") && doc["imu"].contains("gravity_compensation")) {
    cfg.scenario.gravity_compensation = cfg.imu.gravity_compensation;
  }

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    config_error(origin, e.what());
  }
  return cfg;
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, path.string());
}

std::string dump_config(const PipelineConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["sim"] = scenario_to_json(cfg.scenario);
  doc["model"] = nlohmann::ordered_json{{"patch", cfg.model.patch},
                                        {"image_height", cfg.model.image_height},
                                        {"image_width", cfg.model.image_width},
                                        {"model_dim", cfg.model.model_dim},
                                        {"layers", cfg.model.layers},
                                        {"brightness_channels", cfg.model.brightness_channels},
                                        {"heads", cfg.model.heads},
                                        {"ffn_dim", cfg.model.ffn_dim},
                                        {"decoder_hidden", cfg.model.decoder_hidden},
                                        {"drop_path_rate", cfg.model.drop_path_rate}};
  doc["pgo"] = nlohmann::ordered_json{
      {"lambda", cfg.pgo.lambda},
      {"sigma_scale", cfg.pgo.sigma_scale},
      {"lm",
       nlohmann::ordered_json{{"max_iterations", cfg.pgo.lm.max_iterations},
                              {"initial_damping", cfg.pgo.lm.initial_damping},
                              {"damping_up", cfg.pgo.lm.damping_up},
                              {"damping_down", cfg.pgo.lm.damping_down},
                              {"cost_tolerance", cfg.pgo.lm.cost_tolerance},
                              {"step_tolerance", cfg.pgo.lm.step_tolerance}}}};
  doc["imu"] = nlohmann::ordered_json{
      {"gravity_compensation", cfg.imu.gravity_compensation},
      {"gnss",
       nlohmann::ordered_json{{"traj_sigma_rate", cfg.imu.gnss_blend.traj_sigma_rate},
                              {"min_traj_sigma", cfg.imu.gnss_blend.min_traj_sigma}}}};
  doc["eval"] = nlohmann::ordered_json{{"rpe_delta", cfg.eval.rpe_delta},
                                       {"segment_lengths", cfg.eval.segment_lengths},
                                       {"align", cfg.eval.align},
                                       {"with_scale", cfg.eval.with_scale},
                                       {"max_time_offset", cfg.eval.max_time_offset}};
  return doc.dump(2) + "\n";
}

}  // namespace lumio::io
