#include "ami/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ami/core/error.hpp"

namespace ami {

using nlohmann::json;

std::string to_string(const AttackSpec& a) {
  if (a.kind == AttackKind::Attn) return "attn";
  return a.variant == FcVariant::Full ? "fc_full" : "fc_token";
}

AttackSpec attack_spec_from_string(const std::string& s) {
  if (s == "fc_full") return {AttackKind::Fc, FcVariant::Full};
  if (s == "fc_token") return {AttackKind::Fc, FcVariant::Token};
  if (s == "attn") return {AttackKind::Attn, FcVariant::Full};
  throw ConfigError("unknown attack '" + s + "' (expected fc_full, fc_token or attn)");
}

namespace {

// One JSON object of the key tree. The allowed keys are fixed up front and
// anything else is rejected with its full path.
class Node {
 public:
  Node(const json* j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j_) return;
    if (!j_->is_object()) throw ConfigError("'" + where() + "' must be an object");
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) throw ConfigError("unknown key '" + key_path(it.key()) + "'");
    }
  }

  bool has(const char* key) const { return j_ && j_->contains(key); }
  const json* child(const char* key) const { return has(key) ? &(*j_)[key] : nullptr; }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  std::uint64_t u64(const char* key, std::uint64_t def) const {
    if (!has(key)) return def;
    const json& v = (*j_)[key];
    if (!v.is_number_unsigned()) throw ConfigError("'" + key_path(key) + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::size_t size(const char* key, std::size_t def) const { return static_cast<std::size_t>(u64(key, def)); }
  double num(const char* key, double def) const {
    if (!has(key)) return def;
    const json& v = (*j_)[key];
    if (!v.is_number()) throw ConfigError("'" + key_path(key) + "' must be a number");
    return v.get<double>();
  }
  bool flag(const char* key, bool def) const {
    if (!has(key)) return def;
    const json& v = (*j_)[key];
    if (!v.is_boolean()) throw ConfigError("'" + key_path(key) + "' must be true or false");
    return v.get<bool>();
  }
  std::string str(const char* key, const std::string& def) const {
    if (!has(key)) return def;
    const json& v = (*j_)[key];
    if (!v.is_string()) throw ConfigError("'" + key_path(key) + "' must be a string");
    return v.get<std::string>();
  }
  // Absent or "auto" gives nullopt.
  std::optional<double> auto_num(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = (*j_)[key];
    if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
    if (!v.is_number()) throw ConfigError("'" + key_path(key) + "' must be a number or \"auto\"");
    return v.get<double>();
  }
  template <class T, class F>
  std::vector<T> list(const char* key, F convert) const {
    std::vector<T> out;
    if (!has(key)) return out;
    const json& v = (*j_)[key];
    if (!v.is_array()) throw ConfigError("'" + key_path(key) + "' must be a list");
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        out.push_back(convert(v[i]));
      } catch (const json::exception&) {
        throw ConfigError("'" + key_path(key) + "[" + std::to_string(i) + "]' has the wrong type");
      }
    }
    return out;
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const json* j_;
  std::string path_;
};

template <class F>
auto keyed(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

Mechanism mechanism_from_json(const json& v) {
  if (!v.is_string()) throw ConfigError("expected a mechanism name");
  return mechanism_from_string(v.get<std::string>());
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Node root(&doc, "", {"seed", "data", "dp", "attack", "game", "bounds", "sweep", "dp_check", "report"});
  cfg.seed = root.u64("seed", 0);

  Node data(root.child("data"), "data", {"source", "l_X", "d_X", "vocab_k", "path"});
  GameConfig& g = cfg.game;
  g.seed = cfg.seed;
  g.data.source = keyed("data.source", [&] { return source_from_string(data.str("source", "gaussian")); });
  g.data.l = data.size("l_X", g.data.l);
  g.data.d = data.size("d_X", g.data.d);
  g.data.vocab_k = data.size("vocab_k", g.data.vocab_k);
  g.data.path = data.str("path", "");
  if ((g.data.source == Source::EmbedFile || g.data.source == Source::IndexFile) && g.data.path.empty())
    throw ConfigError("missing key 'data.path' (required for source '" + to_string(g.data.source) + "')");

  Node dp(root.child("dp"), "dp", {"mechanism", "epsilon", "k", "the_theta", "dbit_d", "split_budget", "corrupt_p"});
  g.dp.mechanism = keyed("dp.mechanism", [&] { return mechanism_from_string(dp.str("mechanism", "none")); });
  if (g.dp.mechanism != Mechanism::None && !dp.has("epsilon"))
    throw ConfigError("missing key 'dp.epsilon' (required when dp.mechanism is '" + to_string(g.dp.mechanism) + "')");
  g.dp.epsilon = dp.num("epsilon", 0.0);
  g.dp.k = dp.size("k", 0);
  g.dp.the_theta = dp.num("the_theta", g.dp.the_theta);
  g.dp.dbit_d = dp.size("dbit_d", 0);
  g.dp.split_budget = dp.flag("split_budget", false);
  g.dp.corrupt_p = dp.num("corrupt_p", 0.0);

  Node at(root.child("attack"), "attack",
          {"kind", "variant", "token_index", "tau", "beta", "gamma", "target_token_index", "compensate_scaling"});
  const std::string kind = at.str("kind", "fc");
  if (kind == "fc")
    g.attack = AttackKind::Fc;
  else if (kind == "attn")
    g.attack = AttackKind::Attn;
  else
    throw ConfigError("'attack.kind' must be \"fc\" or \"attn\"");
  const std::string variant = at.str("variant", "full");
  if (variant == "full")
    g.fc.variant = FcVariant::Full;
  else if (variant == "token")
    g.fc.variant = FcVariant::Token;
  else
    throw ConfigError("'attack.variant' must be \"full\" or \"token\"");
  g.fc.token_index = at.size("token_index", 0);
  g.fc.tau = at.auto_num("tau");
  g.beta = at.auto_num("beta");
  g.attn.gamma = at.auto_num("gamma");
  g.attn.target_token_index = at.size("target_token_index", 0);
  g.attn.compensate_scaling = at.flag("compensate_scaling", true);

  Node game(root.child("game"), "game", {"trials", "n", "exclusion"});
  g.trials = game.size("trials", g.trials);
  g.n = game.size("n", g.n);
  const std::string excl = game.str("exclusion", "token");
  if (excl == "token")
    g.exclusion = Exclusion::Token;
  else if (excl == "sequence")
    g.exclusion = Exclusion::Sequence;
  else
    throw ConfigError("'game.exclusion' must be \"token\" or \"sequence\"");

  Node bd(root.child("bounds"), "bounds", {"sources", "l_X", "d_X", "beta", "samples", "n"});
  BoundGridConfig& b = cfg.bounds;
  b.seed = cfg.seed;
  b.sources = keyed("bounds.sources",
                    [&] { return bd.list<Source>("sources", [](const json& v) { return source_from_string(v.get<std::string>()); }); });
  b.l_list = bd.list<std::size_t>("l_X", [](const json& v) { return v.get<std::size_t>(); });
  b.d_list = bd.list<std::size_t>("d_X", [](const json& v) { return v.get<std::size_t>(); });
  b.beta.fixed = bd.auto_num("beta");
  b.samples = bd.size("samples", b.samples);
  b.n = bd.size("n", b.n);

  Node sw(root.child("sweep"), "sweep", {"mechanisms", "epsilons", "attacks"});
  cfg.sweep.mechanisms = keyed("sweep.mechanisms", [&] { return sw.list<Mechanism>("mechanisms", mechanism_from_json); });
  cfg.sweep.epsilons = sw.list<double>("epsilons", [](const json& v) {
    if (!v.is_number()) throw ConfigError("'sweep.epsilons' must contain numbers");
    return v.get<double>();
  });
  cfg.sweep.attacks = keyed("sweep.attacks", [&] {
    return sw.list<AttackSpec>("attacks", [](const json& v) { return attack_spec_from_string(v.get<std::string>()); });
  });

  Node dc(root.child("dp_check"), "dp_check", {"trials", "mechanisms"});
  cfg.dp_check_trials = dc.size("trials", cfg.dp_check_trials);
  cfg.dp_check_mechanisms = keyed("dp_check.mechanisms", [&] { return dc.list<Mechanism>("mechanisms", mechanism_from_json); });

  Node rp(root.child("report"), "report", {"path", "format", "timing"});
  cfg.report.path = rp.str("path", "");
  cfg.report.format = rp.str("format", "csv");
  cfg.report.timing = rp.flag("timing", false);
  if (cfg.report.format != "csv" && cfg.report.format != "json")
    throw ConfigError("'report.format' must be \"csv\" or \"json\"");

  cfg.canonical = doc.dump();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.game.seed = *o.seed;
    cfg.bounds.seed = *o.seed;
  }
  if (o.out) cfg.report.path = *o.out;
  if (o.format) {
    if (*o.format != "csv" && *o.format != "json") throw ConfigError("--format must be csv or json");
    cfg.report.format = *o.format;
  }
}

std::string make_run_id(const RunConfig& cfg) {
  // FNV-1a over the canonical text, then mixed with the effective seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h = splitmix64(h ^ splitmix64(cfg.seed));
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 15];
  return s;
}

}  // namespace ami
