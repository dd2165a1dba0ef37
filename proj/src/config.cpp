#include "ecim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ecim {

namespace {

using Json = nlohmann::ordered_json;

// Reject keys outside the allowed set so typos fail loudly instead of
// silently running with defaults.
void check_keys(const Json& obj, const std::string& scope, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::runtime_error("config: unknown key '" + scope + item.key() + "'");
    }
  }
}

template <typename T>
void read_field(const Json& obj, const std::string& scope, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw std::runtime_error("config: bad value for '" + scope + key + "'");
  }
}

void parse_terrain(const Json& obj, TerrainConfig& t) {
  check_keys(obj, "terrain.",
             {"kind", "slope", "noise_amplitude", "noise_cell", "stair_height", "stair_width",
              "stone_spacing", "stone_width", "gap_depth", "noise_seed"});
  if (obj.contains("kind")) {
    std::string name;
    read_field(obj, "terrain.", "kind", name);
    t.kind = terrain_kind_from_name(name);  // throws on unknown names
  }
  read_field(obj, "terrain.", "slope", t.slope);
  read_field(obj, "terrain.", "noise_amplitude", t.noise_amplitude);
  read_field(obj, "terrain.", "noise_cell", t.noise_cell);
  read_field(obj, "terrain.", "stair_height", t.stair_height);
  read_field(obj, "terrain.", "stair_width", t.stair_width);
  read_field(obj, "terrain.", "stone_spacing", t.stone_spacing);
  read_field(obj, "terrain.", "stone_width", t.stone_width);
  read_field(obj, "terrain.", "gap_depth", t.gap_depth);
  read_field(obj, "terrain.", "noise_seed", t.noise_seed);
}

void parse_env(const Json& obj, WalkerConfig& e) {
  check_keys(obj, "env.",
             {"dt", "horizon", "u_max", "damping", "stiffness", "v_scale", "q_max", "alpha_theta",
              "kappa_pitch", "kappa_roll", "w_velocity", "w_omega", "w_torque", "w_accel", "v_cmd",
              "fall_angle"});
  read_field(obj, "env.", "dt", e.dt);
  read_field(obj, "env.", "horizon", e.horizon);
  read_field(obj, "env.", "u_max", e.u_max);
  read_field(obj, "env.", "damping", e.damping);
  read_field(obj, "env.", "stiffness", e.stiffness);
  read_field(obj, "env.", "v_scale", e.v_scale);
  read_field(obj, "env.", "q_max", e.q_max);
  read_field(obj, "env.", "alpha_theta", e.alpha_theta);
  read_field(obj, "env.", "kappa_pitch", e.kappa_pitch);
  read_field(obj, "env.", "kappa_roll", e.kappa_roll);
  read_field(obj, "env.", "w_velocity", e.w_velocity);
  read_field(obj, "env.", "w_omega", e.w_omega);
  read_field(obj, "env.", "w_torque", e.w_torque);
  read_field(obj, "env.", "w_accel", e.w_accel);
  read_field(obj, "env.", "v_cmd", e.v_cmd);
  read_field(obj, "env.", "fall_angle", e.fall_angle);
}

void parse_run(const Json& obj, TrainConfig& c) {
  check_keys(obj, "run.",
             {"n_envs", "iterations", "seeds", "variant", "output_dir", "eval_every",
              "eval_episodes"});
  read_field(obj, "run.", "n_envs", c.n_envs);
  read_field(obj, "run.", "iterations", c.iterations);
  read_field(obj, "run.", "seeds", c.seeds);
  read_field(obj, "run.", "variant", c.variant);
  read_field(obj, "run.", "output_dir", c.output_dir);
  read_field(obj, "run.", "eval_every", c.eval_every);
  read_field(obj, "run.", "eval_episodes", c.eval_episodes);
}

void parse_ppo(const Json& obj, TrainConfig& c) {
  check_keys(obj, "ppo.",
             {"clip_eps", "value_coef", "epochs", "minibatches", "learning_rate", "desired_kl",
              "lr_min", "lr_max", "gamma", "lambda_gae", "policy_hidden", "value_hidden"});
  read_field(obj, "ppo.", "clip_eps", c.ppo.clip_eps);
  read_field(obj, "ppo.", "value_coef", c.ppo.value_coef);
  read_field(obj, "ppo.", "epochs", c.ppo.epochs);
  read_field(obj, "ppo.", "minibatches", c.ppo.minibatches);
  read_field(obj, "ppo.", "learning_rate", c.ppo.learning_rate);
  read_field(obj, "ppo.", "desired_kl", c.ppo.desired_kl);
  read_field(obj, "ppo.", "lr_min", c.ppo.lr_min);
  read_field(obj, "ppo.", "lr_max", c.ppo.lr_max);
  read_field(obj, "ppo.", "gamma", c.gamma);
  read_field(obj, "ppo.", "lambda_gae", c.lambda_gae);
  read_field(obj, "ppo.", "policy_hidden", c.policy_hidden);
  read_field(obj, "ppo.", "value_hidden", c.value_hidden);
}

void parse_entropy(const Json& obj, EntropyConfig& e) {
  check_keys(obj, "entropy.", {"mode", "schedule", "beta_max", "beta_fixed", "tau", "r_max"});
  read_field(obj, "entropy.", "mode", e.mode);
  read_field(obj, "entropy.", "schedule", e.schedule);
  read_field(obj, "entropy.", "beta_max", e.beta_max);
  read_field(obj, "entropy.", "beta_fixed", e.beta_fixed);
  read_field(obj, "entropy.", "tau", e.tau);
  if (obj.contains("r_max")) {
    const Json& v = obj.at("r_max");
    if (v.is_string() && v.get<std::string>() == "auto") {
      e.r_max.reset();
    } else if (v.is_number()) {
      e.r_max = v.get<double>();
    } else {
      throw std::runtime_error("config: bad value for 'entropy.r_max' (number or \"auto\")");
    }
  }
  if (e.mode != "adaptive" && e.mode != "fixed") {
    throw std::runtime_error("config: entropy.mode must be 'adaptive' or 'fixed'");
  }
  if (e.schedule != "return_proportional" && e.schedule != "return_complement") {
    throw std::runtime_error(
        "config: entropy.schedule must be 'return_proportional' or 'return_complement'");
  }
}

void parse_smooth(const Json& obj, SmoothCoeffs& s) {
  check_keys(obj, "smooth.", {"lambda_t", "lambda_s", "sigma", "max_pairs"});
  read_field(obj, "smooth.", "lambda_t", s.lambda_t);
  read_field(obj, "smooth.", "lambda_s", s.lambda_s);
  read_field(obj, "smooth.", "sigma", s.sigma);
  read_field(obj, "smooth.", "max_pairs", s.max_pairs);
}

void parse_intrinsic(const Json& obj, IntrinsicConfig& i) {
  check_keys(obj, "intrinsic.",
             {"eta_icm", "eta_rnd", "eta_cnt", "learning_rate", "train_samples", "density_bins",
              "normalizer_clip"});
  read_field(obj, "intrinsic.", "eta_icm", i.eta_icm);
  read_field(obj, "intrinsic.", "eta_rnd", i.eta_rnd);
  read_field(obj, "intrinsic.", "eta_cnt", i.eta_cnt);
  read_field(obj, "intrinsic.", "learning_rate", i.learning_rate);
  read_field(obj, "intrinsic.", "train_samples", i.train_samples);
  read_field(obj, "intrinsic.", "density_bins", i.density_bins);
  read_field(obj, "intrinsic.", "normalizer_clip", i.normalizer_clip);
}

void parse_metrics(const Json& obj, TrainConfig& c) {
  check_keys(obj, "metrics.", {"steps_window"});
  read_field(obj, "metrics.", "steps_window", c.steps_window);
}

void parse_ablate(const Json& obj, TrainConfig& c) {
  check_keys(obj, "ablate.", {"terrains"});
  read_field(obj, "ablate.", "terrains", c.ablate_terrains);
  for (const std::string& name : c.ablate_terrains) terrain_kind_from_name(name);
}

}  // namespace

TrainConfig parse_config_json(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::runtime_error("config: top level must be an object");
  check_keys(root, "",
             {"terrain", "env", "run", "ppo", "entropy", "smooth", "intrinsic", "metrics",
              "ablate"});

  TrainConfig cfg;
  if (root.contains("terrain")) parse_terrain(root.at("terrain"), cfg.terrain);
  if (root.contains("env")) parse_env(root.at("env"), cfg.env);
  if (root.contains("run")) parse_run(root.at("run"), cfg);
  if (root.contains("ppo")) parse_ppo(root.at("ppo"), cfg);
  if (root.contains("entropy")) parse_entropy(root.at("entropy"), cfg.entropy);
  if (root.contains("smooth")) parse_smooth(root.at("smooth"), cfg.smooth);
  if (root.contains("intrinsic")) parse_intrinsic(root.at("intrinsic"), cfg.intrinsic);
  if (root.contains("metrics")) parse_metrics(root.at("metrics"), cfg);
  if (root.contains("ablate")) parse_ablate(root.at("ablate"), cfg);

  if (cfg.n_envs < 1) throw std::runtime_error("config: run.n_envs must be positive");
  if (cfg.iterations < 1) throw std::runtime_error("config: run.iterations must be positive");
  if (cfg.eval_every < 1) throw std::runtime_error("config: run.eval_every must be positive");
  if (cfg.eval_episodes < 1) throw std::runtime_error("config: run.eval_episodes must be positive");
  if (cfg.seeds.empty()) throw std::runtime_error("config: run.seeds must be non-empty");
  if (cfg.entropy.tau < 1) throw std::runtime_error("config: entropy.tau must be positive");
  if (cfg.intrinsic.density_bins < 1) {
    throw std::runtime_error("config: intrinsic.density_bins must be positive");
  }
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const TrainConfig& cfg) {
  Json root;
  root["terrain"] = {{"kind", terrain_kind_name(cfg.terrain.kind)},
                     {"slope", cfg.terrain.slope},
                     {"noise_amplitude", cfg.terrain.noise_amplitude},
                     {"noise_cell", cfg.terrain.noise_cell},
                     {"stair_height", cfg.terrain.stair_height},
                     {"stair_width", cfg.terrain.stair_width},
                     {"stone_spacing", cfg.terrain.stone_spacing},
                     {"stone_width", cfg.terrain.stone_width},
                     {"gap_depth", cfg.terrain.gap_depth},
                     {"noise_seed", cfg.terrain.noise_seed}};
  root["env"] = {{"dt", cfg.env.dt},
                 {"horizon", cfg.env.horizon},
                 {"u_max", cfg.env.u_max},
                 {"damping", cfg.env.damping},
                 {"stiffness", cfg.env.stiffness},
                 {"v_scale", cfg.env.v_scale},
                 {"q_max", cfg.env.q_max},
                 {"alpha_theta", cfg.env.alpha_theta},
                 {"kappa_pitch", cfg.env.kappa_pitch},
                 {"kappa_roll", cfg.env.kappa_roll},
                 {"w_velocity", cfg.env.w_velocity},
                 {"w_omega", cfg.env.w_omega},
                 {"w_torque", cfg.env.w_torque},
                 {"w_accel", cfg.env.w_accel},
                 {"v_cmd", cfg.env.v_cmd},
                 {"fall_angle", cfg.env.fall_angle}};
  root["run"] = {{"n_envs", cfg.n_envs},
                 {"iterations", cfg.iterations},
                 {"seeds", cfg.seeds},
                 {"variant", cfg.variant},
                 {"output_dir", cfg.output_dir},
                 {"eval_every", cfg.eval_every},
                 {"eval_episodes", cfg.eval_episodes}};
  root["ppo"] = {{"clip_eps", cfg.ppo.clip_eps},
                 {"value_coef", cfg.ppo.value_coef},
                 {"epochs", cfg.ppo.epochs},
                 {"minibatches", cfg.ppo.minibatches},
                 {"learning_rate", cfg.ppo.learning_rate},
                 {"desired_kl", cfg.ppo.desired_kl},
                 {"lr_min", cfg.ppo.lr_min},
                 {"lr_max", cfg.ppo.lr_max},
                 {"gamma", cfg.gamma},
                 {"lambda_gae", cfg.lambda_gae},
                 {"policy_hidden", cfg.policy_hidden},
                 {"value_hidden", cfg.value_hidden}};
  root["entropy"] = {{"mode", cfg.entropy.mode},
                     {"schedule", cfg.entropy.schedule},
                     {"beta_max", cfg.entropy.beta_max},
                     {"beta_fixed", cfg.entropy.beta_fixed},
                     {"tau", cfg.entropy.tau}};
  if (cfg.entropy.r_max.has_value()) {
    root["entropy"]["r_max"] = *cfg.entropy.r_max;
  } else {
    root["entropy"]["r_max"] = "auto";
  }
  root["smooth"] = {{"lambda_t", cfg.smooth.lambda_t},
                    {"lambda_s", cfg.smooth.lambda_s},
                    {"sigma", cfg.smooth.sigma},
                    {"max_pairs", cfg.smooth.max_pairs}};
  root["intrinsic"] = {{"eta_icm", cfg.intrinsic.eta_icm},
                       {"eta_rnd", cfg.intrinsic.eta_rnd},
                       {"eta_cnt", cfg.intrinsic.eta_cnt},
                       {"learning_rate", cfg.intrinsic.learning_rate},
                       {"train_samples", cfg.intrinsic.train_samples},
                       {"density_bins", cfg.intrinsic.density_bins},
                       {"normalizer_clip", cfg.intrinsic.normalizer_clip}};
  root["metrics"] = {{"steps_window", cfg.steps_window}};
  root["ablate"] = {{"terrains", cfg.ablate_terrains}};
  return root.dump(2) + "\n";
}

void save_config(const TrainConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << config_to_json(cfg);
}

TrainConfig apply_variant(TrainConfig cfg, const std::string& variant) {
  cfg.variant = variant;
  if (variant == "ecim") return cfg;
  if (variant == "ppo") {
    cfg.entropy.mode = "fixed";
    cfg.smooth.lambda_t = 0.0;
    cfg.smooth.lambda_s = 0.0;
    cfg.intrinsic.eta_icm = 0.0;
    cfg.intrinsic.eta_rnd = 0.0;
    cfg.intrinsic.eta_cnt = 0.0;
    return cfg;
  }
  if (variant == "ecim_minus_aecpom") {
    cfg.entropy.mode = "fixed";
    return cfg;
  }
  if (variant == "ecim_minus_mcrf") {
    cfg.smooth.lambda_t = 0.0;
    cfg.smooth.lambda_s = 0.0;
    return cfg;
  }
  if (variant == "ecim_minus_imdeem") {
    cfg.intrinsic.eta_icm = 0.0;
    cfg.intrinsic.eta_rnd = 0.0;
    cfg.intrinsic.eta_cnt = 0.0;
    return cfg;
  }
  throw std::runtime_error("config: unknown variant '" + variant + "'");
}

std::string resolve_output_root(const TrainConfig& cfg) {
  if (const char* env = std::getenv("ECIM_OUTPUT_ROOT"); env != nullptr && env[0] != '\0') {
    return env;
  }
  return cfg.output_dir;
}

}  // namespace ecim
