#include "asvlab/config.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "asvlab/csv.hpp"

namespace asv {

DampingCoeffs nominal_damping() {
  return {16.45, 15.80, 6.00, 2.94, 2.76, 5.00};
}

DampingCoeffs identified_damping() {
  // Sway is not excitable on the single-axis rig; the sentinel 99.99 keeps
  // lateral drift overdamped instead of pretending to a measured value.
  return {0.00, 99.99, 0.83, 17.26, 99.99, 17.34};
}

HydroParams make_hydro(const HullConfig& hull, const DampingCoeffs& d) {
  HydroParams p;
  p.mass = hull.mass;
  p.iz = hull.iz;
  p.added_mass_u = hull.added_mass_u;
  p.added_mass_v = hull.added_mass_v;
  p.added_mass_r = hull.added_mass_r;
  p.xu = d.xu;
  p.yv = d.yv;
  p.nr = d.nr;
  p.xuu = d.xuu;
  p.yvv = d.yvv;
  p.nrr = d.nrr;
  return p;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const KeyValueFile& kv, const std::string& section,
                       const std::string& key, const std::string& msg) {
  int line = 0;
  auto s = kv.sections.find(section);
  if (s != kv.sections.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) line = k->second.second;
  }
  std::ostringstream out;
  out << kv.path;
  if (line > 0) out << ":" << line;
  out << ": [" << section << "] " << key << ": " << msg;
  throw ConfigError(out.str());
}

double parse_double(const KeyValueFile& kv, const std::string& section,
                    const std::string& key, const std::string& text) {
  double v = 0;
  const char* b = text.data();
  auto [p, ec] = std::from_chars(b, b + text.size(), v);
  if (ec != std::errc() || p != b + text.size())
    fail(kv, section, key, "'" + text + "' is not a number");
  return v;
}

std::int64_t parse_int(const KeyValueFile& kv, const std::string& section,
                       const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  const char* b = text.data();
  auto [p, ec] = std::from_chars(b, b + text.size(), v);
  if (ec != std::errc() || p != b + text.size())
    fail(kv, section, key, "'" + text + "' is not an integer");
  return v;
}

bool parse_bool(const KeyValueFile& kv, const std::string& section,
                const std::string& key, const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  fail(kv, section, key, "'" + text + "' is not on/off");
}

// Binds config keys to struct fields so parse and serialize can never
// disagree about the key set.
struct Schema {
  struct Entry {
    std::string section, key;
    std::function<void(const KeyValueFile&, const std::string&)> set;
    std::function<std::string()> get;
  };
  std::vector<Entry> entries;

  void num(const std::string& sec, const std::string& key, double* field) {
    entries.push_back({sec, key,
                       [=](const KeyValueFile& kv, const std::string& v) {
                         *field = parse_double(kv, sec, key, v);
                       },
                       [=] { return format_double(*field); }});
  }
  void integer(const std::string& sec, const std::string& key, int* field) {
    entries.push_back({sec, key,
                       [=](const KeyValueFile& kv, const std::string& v) {
                         *field = static_cast<int>(parse_int(kv, sec, key, v));
                       },
                       [=] { return std::to_string(*field); }});
  }
  void u64(const std::string& sec, const std::string& key,
           std::uint64_t* field) {
    entries.push_back({sec, key,
                       [=](const KeyValueFile& kv, const std::string& v) {
                         *field = static_cast<std::uint64_t>(
                             parse_int(kv, sec, key, v));
                       },
                       [=] { return std::to_string(*field); }});
  }
  void boolean(const std::string& sec, const std::string& key, bool* field) {
    entries.push_back({sec, key,
                       [=](const KeyValueFile& kv, const std::string& v) {
                         *field = parse_bool(kv, sec, key, v);
                       },
                       [=] { return *field ? std::string("on")
                                           : std::string("off"); }});
  }
  void text(const std::string& sec, const std::string& key,
            std::string* field) {
    entries.push_back(
        {sec, key,
         [=](const KeyValueFile&, const std::string& v) { *field = v; },
         [=] { return *field; }});
  }
  void angle_deg(const std::string& sec, const std::string& key,
                 double* field_rad) {
    entries.push_back({sec, key,
                       [=](const KeyValueFile& kv, const std::string& v) {
                         *field_rad = deg2rad(parse_double(kv, sec, key, v));
                       },
                       [=] { return format_double(rad2deg(*field_rad)); }});
  }
};

void damping_schema(Schema& s, const std::string& sec, DampingCoeffs* d) {
  s.num(sec, "xu", &d->xu);
  s.num(sec, "yv", &d->yv);
  s.num(sec, "nr", &d->nr);
  s.num(sec, "xuu", &d->xuu);
  s.num(sec, "yvv", &d->yvv);
  s.num(sec, "nrr", &d->nrr);
}

Schema build_schema(RunConfig* c, std::string* left_csv,
                    std::string* right_csv) {
  Schema s;
  s.u64("run", "master_seed", &c->master_seed);
  s.text("run", "out_dir", &c->out_dir);

  s.num("hull", "mass", &c->hull.mass);
  s.num("hull", "length", &c->hull.length);
  s.num("hull", "width", &c->hull.width);
  s.num("hull", "iz", &c->hull.iz);
  s.num("hull", "water_density", &c->hull.water_density);
  s.num("hull", "waterplane_area", &c->hull.waterplane_area);
  s.num("hull", "hull_height", &c->hull.hull_height);
  s.num("hull", "added_mass_u", &c->hull.added_mass_u);
  s.num("hull", "added_mass_v", &c->hull.added_mass_v);
  s.num("hull", "added_mass_r", &c->hull.added_mass_r);

  damping_schema(s, "hydro_nominal", &c->hydro_nominal);
  damping_schema(s, "hydro_identified", &c->hydro_identified);

  s.num("thruster", "separation", &c->thruster.separation);
  s.num("thruster", "force_forward", &c->thruster.force_forward);
  s.num("thruster", "force_reverse", &c->thruster.force_reverse);
  s.text("thruster", "identified_left_csv", left_csv);
  s.text("thruster", "identified_right_csv", right_csv);

  s.num("reward", "lambda1", &c->reward.lambda1);
  s.num("reward", "lambda2", &c->reward.lambda2);
  s.num("reward", "lambda3", &c->reward.lambda3);
  s.num("reward", "lambda4", &c->reward.lambda4);
  s.num("reward", "lambda5", &c->reward.lambda5);
  s.num("reward", "lambda6", &c->reward.lambda6);
  s.num("reward", "k1", &c->reward.k1);
  s.num("reward", "k2", &c->reward.k2);
  s.num("reward", "k3", &c->reward.k3);
  s.num("reward", "k4", &c->reward.k4);
  s.num("reward", "d_threshold", &c->reward.d_threshold);

  s.num("randomization", "pos_noise", &c->randomization.pos_noise);
  s.num("randomization", "heading_noise", &c->randomization.heading_noise);
  s.num("randomization", "drag_jitter", &c->randomization.drag_jitter);
  s.num("randomization", "thrust_scale_low",
        &c->randomization.thrust_scale_low);
  s.num("randomization", "thrust_scale_high",
        &c->randomization.thrust_scale_high);
  s.num("randomization", "force_offset_max",
        &c->randomization.force_offset_max);
  s.num("randomization", "force_amp_max", &c->randomization.force_amp_max);
  s.num("randomization", "torque_offset_max",
        &c->randomization.torque_offset_max);
  s.num("randomization", "torque_amp_max", &c->randomization.torque_amp_max);
  s.num("randomization", "dist_freq_low", &c->randomization.dist_freq_low);
  s.num("randomization", "dist_freq_high", &c->randomization.dist_freq_high);
  s.num("randomization", "action_noise", &c->randomization.action_noise);
  s.boolean("randomization", "obs_noise", &c->randomization.obs_noise);
  s.boolean("randomization", "drag_randomization",
            &c->randomization.drag_randomization);
  s.boolean("randomization", "disturbances", &c->randomization.disturbances);

  s.num("env", "dt", &c->env.dt);
  s.integer("env", "max_steps", &c->env.max_steps);
  s.num("env", "runaway_distance", &c->env.runaway_distance);
  s.num("env", "goal_min_distance", &c->env.goal_min_distance);
  s.num("env", "goal_max_distance", &c->env.goal_max_distance);
  s.angle_deg("env", "goal_bearing_max_deg", &c->env.goal_bearing_max);

  s.integer("ppo", "hidden", &c->ppo.hidden);
  s.num("ppo", "log_std_init", &c->ppo.log_std_init);
  s.num("ppo", "learning_rate", &c->ppo.learning_rate);
  s.num("ppo", "gamma", &c->ppo.gamma);
  s.num("ppo", "gae_lambda", &c->ppo.gae_lambda);
  s.num("ppo", "clip_epsilon", &c->ppo.clip_epsilon);
  s.integer("ppo", "epochs_per_batch", &c->ppo.epochs_per_batch);
  s.integer("ppo", "minibatch_count", &c->ppo.minibatch_count);
  s.num("ppo", "entropy_coeff", &c->ppo.entropy_coeff);
  s.num("ppo", "value_coeff", &c->ppo.value_coeff);
  s.num("ppo", "grad_clip_norm", &c->ppo.grad_clip_norm);
  s.integer("ppo", "batch_size", &c->ppo.batch_size);
  s.integer("ppo", "max_iterations", &c->ppo.max_iterations);
  s.integer("ppo", "checkpoint_interval", &c->ppo.checkpoint_interval);

  s.integer("batch", "n_envs", &c->batch.n_envs);
  s.integer("batch", "workers", &c->batch.workers);

  s.num("eval", "capture_tolerance", &c->eval.capture_tolerance);
  s.boolean("eval", "disturbances", &c->eval.disturbances);
  s.num("eval", "min_success", &c->eval.min_success);
  return s;
}

ThrusterCurvePoints load_curve_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path, {"command", "force_n"});
  ThrusterCurvePoints pts;
  for (const auto& row : t.rows) {
    pts.command.push_back(row[0]);
    pts.force.push_back(row[1]);
  }
  for (std::size_t i = 1; i < pts.command.size(); ++i) {
    if (pts.command[i] <= pts.command[i - 1])
      throw ConfigError(path.string() +
                        ": thruster curve commands must be strictly "
                        "increasing");
    if (pts.force[i] < pts.force[i - 1])
      throw ConfigError(path.string() +
                        ": thruster curve forces must be nondecreasing");
  }
  if (pts.command.size() < 2 || pts.command.front() > 0.0 ||
      pts.command.back() < 0.0)
    throw ConfigError(path.string() +
                      ": thruster curve must bracket command 0");
  return pts;
}

}  // namespace

bool KeyValueFile::has(const std::string& section,
                       const std::string& key) const {
  auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string KeyValueFile::get(const std::string& section,
                              const std::string& key) const {
  return sections.at(section).at(key).first;
}

KeyValueFile parse_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path.string());
  KeyValueFile kv;
  kv.path = path.string();
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(kv.path + ":" + std::to_string(lineno) +
                          ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(kv.path + ":" + std::to_string(lineno) +
                          ": empty section name");
      kv.sections[section];  // a section may legitimately be empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(kv.path + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(kv.path + ":" + std::to_string(lineno) +
                        ": empty key");
    if (section.empty())
      throw ConfigError(kv.path + ":" + std::to_string(lineno) +
                        ": key '" + key + "' appears before any [section]");
    auto [it, inserted] =
        kv.sections[section].emplace(key, std::make_pair(value, lineno));
    if (!inserted)
      throw ConfigError(kv.path + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "' in [" + section + "]");
  }
  return kv;
}

RunConfig parse_run_config(const KeyValueFile& kv) {
  RunConfig cfg;
  std::string left_csv, right_csv;
  Schema schema = build_schema(&cfg, &left_csv, &right_csv);

  // Index the schema, then walk the file so unknown entries are caught.
  std::map<std::string, std::map<std::string, const Schema::Entry*>> index;
  for (const auto& e : schema.entries) index[e.section][e.key] = &e;

  for (const auto& [section, keys] : kv.sections) {
    auto sec_it = index.find(section);
    if (sec_it == index.end())
      throw ConfigError(kv.path + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      auto key_it = sec_it->second.find(key);
      if (key_it == sec_it->second.end())
        throw ConfigError(kv.path + ":" + std::to_string(value.second) +
                          ": unknown key '" + key + "' in [" + section + "]");
      key_it->second->set(kv, value.first);
    }
  }

  const std::filesystem::path base =
      kv.path.empty() ? std::filesystem::path(".")
                      : std::filesystem::path(kv.path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  if (!left_csv.empty())
    cfg.thruster.identified_left = load_curve_csv(resolve(left_csv));
  if (!right_csv.empty())
    cfg.thruster.identified_right = load_curve_csv(resolve(right_csv));

  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(parse_key_value_file(path));
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.hull.mass > 0, "hull mass must be positive");
  require(c.hull.iz > 0, "hull iz must be positive");
  require(c.hull.water_density > 0, "water_density must be positive");
  require(c.hull.waterplane_area > 0, "waterplane_area must be positive");
  require(c.hull.hull_height > 0, "hull_height must be positive");
  require(c.hull.added_mass_u >= 0 && c.hull.added_mass_v >= 0 &&
              c.hull.added_mass_r >= 0,
          "added masses must be nonnegative");

  const double draft =
      c.hull.mass / (c.hull.water_density * c.hull.waterplane_area);
  require(draft <= c.hull.hull_height,
          "hull displacement insufficient: equilibrium draft " +
              format_double(draft) + " m exceeds hull_height " +
              format_double(c.hull.hull_height) + " m");

  for (const DampingCoeffs* d : {&c.hydro_nominal, &c.hydro_identified}) {
    require(d->xu >= 0 && d->yv >= 0 && d->nr >= 0 && d->xuu >= 0 &&
                d->yvv >= 0 && d->nrr >= 0,
            "damping coefficients must be nonnegative");
  }

  require(c.thruster.separation > 0, "thruster separation must be positive");
  require(c.thruster.force_forward > 0, "force_forward must be positive");
  require(c.thruster.force_reverse >= 0, "force_reverse must be nonnegative");

  require(c.reward.d_threshold > 0, "d_threshold must be positive");

  const auto& r = c.randomization;
  require(r.pos_noise >= 0 && r.heading_noise >= 0 && r.action_noise >= 0,
          "noise magnitudes must be nonnegative");
  require(r.drag_jitter >= 0 && r.drag_jitter < 1,
          "drag_jitter must be in [0, 1)");
  require(r.thrust_scale_low > 0 &&
              r.thrust_scale_low <= r.thrust_scale_high,
          "thrust scale range must satisfy 0 < low <= high");
  require(r.force_offset_max >= 0 && r.force_amp_max >= 0 &&
              r.torque_offset_max >= 0 && r.torque_amp_max >= 0,
          "disturbance magnitudes must be nonnegative");
  require(r.dist_freq_low > 0 && r.dist_freq_low <= r.dist_freq_high,
          "disturbance frequency range must satisfy 0 < low <= high");

  require(c.env.dt > 0, "dt must be positive");
  require(c.env.max_steps > 0, "max_steps must be positive");
  require(c.env.goal_min_distance > 0 &&
              c.env.goal_min_distance <= c.env.goal_max_distance,
          "goal distance range must satisfy 0 < min <= max");
  require(c.env.runaway_distance > c.env.goal_max_distance,
          "runaway_distance must exceed goal_max_distance");
  require(c.env.goal_bearing_max >= 0 && c.env.goal_bearing_max <= kPi,
          "goal_bearing_max_deg must be in [0, 180]");

  const auto& p = c.ppo;
  require(p.hidden > 0, "hidden must be positive");
  require(p.learning_rate > 0, "learning_rate must be positive");
  require(p.gamma > 0 && p.gamma <= 1, "gamma must be in (0, 1]");
  require(p.gae_lambda >= 0 && p.gae_lambda <= 1,
          "gae_lambda must be in [0, 1]");
  require(p.clip_epsilon > 0, "clip_epsilon must be positive");
  require(p.epochs_per_batch >= 1, "epochs_per_batch must be >= 1");
  require(p.minibatch_count >= 1, "minibatch_count must be >= 1");
  require(p.value_coeff >= 0 && p.entropy_coeff >= 0,
          "loss coefficients must be nonnegative");
  require(p.grad_clip_norm > 0, "grad_clip_norm must be positive");
  require(p.batch_size >= 1, "batch_size must be >= 1");
  require(p.batch_size % p.minibatch_count == 0,
          "batch_size must be divisible by minibatch_count");
  require(p.max_iterations >= 1, "max_iterations must be >= 1");
  require(p.checkpoint_interval >= 1, "checkpoint_interval must be >= 1");

  require(c.batch.n_envs >= 1, "n_envs must be >= 1");
  require(c.batch.workers >= 0, "workers must be >= 0");

  require(c.eval.capture_tolerance > 0,
          "capture_tolerance must be positive");
  require(c.eval.min_success >= 0 && c.eval.min_success <= 1,
          "min_success must be in [0, 1]");
}

namespace {

std::string serialize(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string left_csv, right_csv;
  Schema schema = build_schema(&copy, &left_csv, &right_csv);
  std::ostringstream out;
  std::string section;
  for (const auto& e : schema.entries) {
    if (e.section != section) {
      if (!section.empty()) out << "\n";
      out << "[" << e.section << "]\n";
      section = e.section;
    }
    out << e.key << " = " << e.get() << "\n";
  }
  return out.str();
}

}  // namespace

void write_resolved_config(const RunConfig& cfg,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out << "# Resolved configuration (defaults included). Identified thruster\n"
         "# curves, if any, are not reproduced here; they live in the CSVs\n"
         "# referenced by the original config.\n\n";
  out << serialize(cfg);
  if (!out.flush())
    throw ConfigError("short write to " + path.string());
}

void apply_hydro_overlay(RunConfig& cfg, const std::filesystem::path& path) {
  const KeyValueFile kv = parse_key_value_file(path);
  Schema s;
  damping_schema(s, "hydro", &cfg.hydro_identified);
  std::map<std::string, const Schema::Entry*> index;
  for (const auto& e : s.entries) index[e.key] = &e;
  for (const auto& [section, keys] : kv.sections) {
    if (section != "hydro")
      throw ConfigError(kv.path + ": unknown section [" + section +
                        "] (coefficient overlays contain only [hydro])");
    for (const auto& [key, value] : keys) {
      auto it = index.find(key);
      if (it == index.end())
        throw ConfigError(kv.path + ":" + std::to_string(value.second) +
                          ": unknown key '" + key + "' in [hydro]");
      it->second->set(kv, value.first);
    }
  }
  validate(cfg);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = serialize(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

AgentVariant variant_from_name(const std::string& name) {
  if (name == "NV") return {name, HydroSource::kNominal, 0.0};
  if (name == "NV-DR") return {name, HydroSource::kNominal, 0.5};
  if (name == "SID") return {name, HydroSource::kIdentified, 0.0};
  if (name == "SID-DR") return {name, HydroSource::kIdentified, 0.5};
  throw ConfigError("unknown variant '" + name +
                    "' (expected NV, NV-DR, SID, or SID-DR)");
}

}  // namespace asv
