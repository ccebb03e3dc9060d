#include "tslam/config/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tslam/util/hash.hpp"
#include "tslam/util/rng.hpp"

namespace ts::cfg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return i;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::uint64_t i = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return i;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad unsigned for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad bool for " + key + ": '" + v + "'");
}

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::vector<Entry> build_registry() {
  std::vector<Entry> r;
  auto add_int = [&r](const char* key, int RunConfig::*m) {
    r.push_back({key, [m](const RunConfig& c) { return std::to_string(c.*m); },
                 [m, key](RunConfig& c, const std::string& v) {
                   c.*m = static_cast<int>(parse_int(key, v));
                 }});
  };
  auto add_i64 = [&r](const char* key, std::int64_t RunConfig::*m) {
    r.push_back({key, [m](const RunConfig& c) { return std::to_string(c.*m); },
                 [m, key](RunConfig& c, const std::string& v) { c.*m = parse_int(key, v); }});
  };
  auto add_u64 = [&r](const char* key, std::uint64_t RunConfig::*m) {
    r.push_back({key, [m](const RunConfig& c) { return std::to_string(c.*m); },
                 [m, key](RunConfig& c, const std::string& v) { c.*m = parse_u64(key, v); }});
  };
  auto add_double = [&r](const char* key, double RunConfig::*m) {
    r.push_back({key, [m](const RunConfig& c) { return fmt_double(c.*m); },
                 [m, key](RunConfig& c, const std::string& v) { c.*m = parse_double(key, v); }});
  };
  auto add_bool = [&r](const char* key, bool RunConfig::*m) {
    r.push_back({key, [m](const RunConfig& c) { return c.*m ? "true" : "false"; },
                 [m, key](RunConfig& c, const std::string& v) { c.*m = parse_bool(key, v); }});
  };
  auto add_string = [&r](const char* key, std::string RunConfig::*m) {
    r.push_back({key, [m](const RunConfig& c) { return c.*m; },
                 [m](RunConfig& c, const std::string& v) { c.*m = v; }});
  };

  add_u64("seed", &RunConfig::seed);
  add_int("corpus.size", &RunConfig::corpus_size);
  add_double("corpus.holdout", &RunConfig::corpus_holdout);
  add_string("corpus.families", &RunConfig::corpus_families);
  add_int("grid.n", &RunConfig::grid_n);
  add_int("probe.horizon", &RunConfig::horizon);
  add_int("probe.substeps", &RunConfig::substeps);
  add_double("probe.step_ms", &RunConfig::step_ms);
  add_double("probe.sensor_radius", &RunConfig::sensor_radius);
  add_double("probe.trans_step", &RunConfig::trans_step);
  add_double("probe.angle_step", &RunConfig::angle_step);
  add_double("probe.joint_step", &RunConfig::joint_step);
  add_string("reward.variant", &RunConfig::reward_variant);
  add_double("reward.lambda", &RunConfig::reward_lambda);
  add_int("reward.k", &RunConfig::reward_k);
  add_double("reward.alpha", &RunConfig::reward_alpha);
  add_int("reward.stride", &RunConfig::reward_stride);
  add_double("ppo.clip", &RunConfig::ppo_clip);
  add_int("ppo.epochs", &RunConfig::ppo_epochs);
  add_int("ppo.minibatch", &RunConfig::ppo_minibatch);
  add_double("ppo.lr", &RunConfig::ppo_lr);
  add_double("ppo.ent_coef", &RunConfig::ppo_ent_coef);
  add_double("ppo.vf_coef", &RunConfig::ppo_vf_coef);
  add_double("ppo.gamma", &RunConfig::ppo_gamma);
  add_double("ppo.lam", &RunConfig::ppo_lam);
  add_i64("rl.budget_steps", &RunConfig::rl_budget_steps);
  add_int("rl.n_envs", &RunConfig::rl_n_envs);
  add_int("rl.pose_count", &RunConfig::rl_pose_count);
  add_double("rl.reward_scale", &RunConfig::rl_reward_scale);
  add_int("rl.checkpoint_every", &RunConfig::rl_checkpoint_every);
  add_bool("rl.share_encoder", &RunConfig::rl_share_encoder);
  add_string("rl.hidden", &RunConfig::rl_hidden);
  add_double("rl.log_std_init", &RunConfig::rl_log_std_init);
  add_string("recon.channels", &RunConfig::recon_channels);
  add_string("recon.decoder", &RunConfig::recon_decoder);
  add_int("recon.points", &RunConfig::recon_points);
  add_double("recon.lr", &RunConfig::recon_lr);
  add_int("recon.epochs", &RunConfig::recon_epochs);
  add_bool("recon.policy_masks", &RunConfig::recon_policy_masks);
  add_int("eval.episodes", &RunConfig::eval_episodes);
  add_int("eval.poses", &RunConfig::eval_poses);
  add_int("eval.samples", &RunConfig::eval_samples);
  add_int("eval.out_resolution", &RunConfig::eval_out_resolution);
  add_string("eval.aggregation", &RunConfig::eval_aggregation);
  add_string("paths.corpus", &RunConfig::paths_corpus);
  add_string("paths.out", &RunConfig::paths_out);
  add_string("paths.policy", &RunConfig::paths_policy);
  add_string("paths.recon", &RunConfig::paths_recon);

  std::sort(r.begin(), r.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
  return r;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = build_registry();
  return r;
}

const Entry* find_entry(const std::string& key) {
  const auto& r = registry();
  const auto it = std::lower_bound(r.begin(), r.end(), key,
                                   [](const Entry& e, const std::string& k) { return e.key < k; });
  if (it == r.end() || it->key != key) return nullptr;
  return &*it;
}

}  // namespace

void RunConfig::validate() const {
  if (corpus_size < 1) throw std::invalid_argument("config: corpus.size must be positive");
  if (corpus_holdout < 0.0 || corpus_holdout >= 1.0)
    throw std::invalid_argument("config: corpus.holdout must be in [0,1)");
  if (grid_n < 8 || grid_n % 8 != 0)
    throw std::invalid_argument("config: grid.n must be a positive multiple of 8");
  if (horizon < 1) throw std::invalid_argument("config: probe.horizon must be positive");
  if (eval_poses < 1) throw std::invalid_argument("config: eval.poses must be positive");
  if (eval_episodes < 1) throw std::invalid_argument("config: eval.episodes must be positive");
  if (eval_aggregation != "union" && eval_aggregation != "average")
    throw std::invalid_argument("config: eval.aggregation must be union or average");
  reward::parse_variant(reward_variant);
  probe_spec(*this).validate();
  reward_config(*this).validate();
  ppo_config(*this).validate();
  net_config(*this).validate();
  recon_config(*this).validate();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  keys.reserve(registry().size());
  for (const Entry& e : registry()) keys.push_back(e.key);
  return keys;
}

void set_key(RunConfig& rc, const std::string& key, const std::string& value) {
  const Entry* e = find_entry(key);
  if (!e) throw std::invalid_argument("config: unknown key '" + key + "'");
  e->set(rc, value);
}

std::string get_key(const RunConfig& rc, const std::string& key) {
  const Entry* e = find_entry(key);
  if (!e) throw std::invalid_argument("config: unknown key '" + key + "'");
  return e->get(rc);
}

RunConfig parse_config(const std::string& text) {
  RunConfig rc;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value: '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!seen.insert(key).second)
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    set_key(rc, key, value);
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string canonical_text(const RunConfig& rc) {
  std::string out;
  for (const Entry& e : registry()) {
    out += e.key;
    out += '=';
    out += e.get(rc);
    out += '\n';
  }
  return out;
}

std::uint64_t config_digest(const RunConfig& rc) { return fnv1a64(canonical_text(rc)); }

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::string token;
  std::istringstream is(csv);
  while (std::getline(is, token, ',')) {
    const std::string t = trim(token);
    if (t.empty()) throw std::invalid_argument("config: empty element in list '" + csv + "'");
    out.push_back(static_cast<int>(parse_int("list", t)));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list");
  return out;
}

env::ProbeSpec probe_spec(const RunConfig& rc) {
  env::ProbeSpec spec;
  spec.horizon = rc.horizon;
  spec.substeps = rc.substeps;
  spec.step_ms = rc.step_ms;
  spec.sensor_radius = rc.sensor_radius;
  spec.trans_step = rc.trans_step;
  spec.angle_step = rc.angle_step;
  spec.joint_step = rc.joint_step;
  return spec;
}

reward::RewardConfig reward_config(const RunConfig& rc) {
  reward::RewardConfig c;
  c.variant = reward::parse_variant(rc.reward_variant);
  c.lambda = rc.reward_lambda;
  c.k = rc.reward_k;
  c.alpha = rc.reward_alpha;
  c.stride = rc.reward_stride;
  return c;
}

rl::PpoConfig ppo_config(const RunConfig& rc) {
  rl::PpoConfig c;
  c.clip = rc.ppo_clip;
  c.epochs = rc.ppo_epochs;
  c.minibatch = rc.ppo_minibatch;
  c.lr = rc.ppo_lr;
  c.ent_coef = rc.ppo_ent_coef;
  c.vf_coef = rc.ppo_vf_coef;
  c.gamma = rc.ppo_gamma;
  c.lam = rc.ppo_lam;
  return c;
}

rl::NetConfig net_config(const RunConfig& rc) {
  const env::ProbeSpec spec = probe_spec(rc);
  rl::NetConfig c;
  c.grid_n = rc.grid_n;
  c.pose_dim = spec.action_dim();
  c.action_dim = spec.action_dim();
  c.hidden = parse_int_list(rc.rl_hidden);
  c.log_std_init = rc.rl_log_std_init;
  c.share_encoder = rc.rl_share_encoder;
  return c;
}

rl::TrainConfig train_config(const RunConfig& rc) {
  rl::TrainConfig c;
  c.seed = derive_seed(rc.seed, "train-explore");
  c.budget_steps = rc.rl_budget_steps;
  c.n_envs = rc.rl_n_envs;
  c.pose_count = rc.rl_pose_count;
  c.reward_scale = rc.rl_reward_scale;
  c.checkpoint_every = rc.rl_checkpoint_every;
  c.config_digest = config_digest(rc);
  c.probe = probe_spec(rc);
  c.net = net_config(rc);
  c.ppo = ppo_config(rc);
  c.reward = reward_config(rc);
  return c;
}

recon::ReconConfig recon_config(const RunConfig& rc) {
  recon::ReconConfig c;
  c.grid_n = rc.grid_n;
  c.channels = parse_int_list(rc.recon_channels);
  c.decoder_hidden = parse_int_list(rc.recon_decoder);
  c.points_per_sample = rc.recon_points;
  c.lr = rc.recon_lr;
  c.epochs = rc.recon_epochs;
  c.policy_masks = rc.recon_policy_masks;
  c.seed = derive_seed(rc.seed, "train-recon");
  c.config_digest = config_digest(rc);
  return c;
}

}  // namespace ts::cfg
