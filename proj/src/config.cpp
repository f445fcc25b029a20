#include "uavnoma/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace uavnoma::config {

namespace {

enum class Kind { Real, Count, Choice, Reals, Users, RealOrAuto, Heights };

struct Field {
  const char* key;  // section.key
  Kind kind;
  const char* sub6;    // default text; nullptr when the key does not apply
  const char* mmwave;
  std::vector<const char*> choices = {};
};

// Registry order is snapshot order.
const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"channel.spectrum", Kind::Choice, "sub6", "mmwave", {"sub6", "mmwave"}},
      {"channel.carrier_hz", Kind::Real, "2e9", "28e9"},
      {"channel.tx_power_dbm", Kind::Real, "30", "20"},
      {"channel.bandwidth_hz", Kind::Real, "50e6", "2e9"},
      {"channel.noise_dbm", Kind::Real, "-88", "-84"},
      {"channel.los_c", Kind::Real, "0.6", "9.6117"},
      {"channel.los_y", Kind::Real, "0.11", "0.1581"},
      {"channel.n_uav", Kind::Count, "1", "8"},
      {"channel.n_ue", Kind::Count, "1", "8"},
      {"channel.intercept_los_db", Kind::Real, nullptr, "-64"},
      {"channel.intercept_nlos_db", Kind::Real, nullptr, "-72"},
      {"channel.exponent_los", Kind::Real, nullptr, "2"},
      {"channel.exponent_nlos", Kind::Real, nullptr, "2.92"},
      {"channel.excess_los_db", Kind::Real, "1", nullptr},
      {"channel.excess_nlos_db", Kind::Real, "20", nullptr},
      {"channel.min_elevation_deg", Kind::Real, "15", nullptr},

      {"scenario.area_side", Kind::Real, "100", "100"},
      {"scenario.users", Kind::Users, "4 15; -44 -49; -5 21; 47 49", "4 15; -44 -49; -5 21; 47 49"},
      {"scenario.h_min", Kind::Real, "10", "10"},
      {"scenario.h_max", Kind::Real, "300", "300"},
      {"scenario.h_init", Kind::Real, "50", "50"},
      {"scenario.alpha_init", Kind::Real, "0.5", "0.5"},
      {"scenario.step_x", Kind::Real, "1", "1"},
      {"scenario.step_y", Kind::Real, "1", "1"},
      {"scenario.step_h", Kind::Real, "1", "1"},
      {"scenario.step_alpha", Kind::Real, "0.01", "0.01"},
      {"scenario.alpha_min", Kind::Real, "0.01", "0.01"},
      {"scenario.alpha_max", Kind::Real, "0.99", "0.99"},
      {"scenario.link_mode", Kind::Choice, "expected", "expected",
       {"always_los", "expected", "bernoulli_step", "bernoulli_episode"}},
      {"scenario.r_min_over_w", Kind::Real, "0", "0"},
      {"scenario.pairing", Kind::Choice, "strong_half", "strong_half", {"strong_half", "best_worst"}},
      {"scenario.gain_db_min", Kind::RealOrAuto, "auto", "auto"},
      {"scenario.gain_db_max", Kind::RealOrAuto, "auto", "auto"},

      {"reward.rate", Kind::Real, "1", "1"},
      {"reward.fairness", Kind::Real, "0", "0"},
      {"reward.gain", Kind::Real, "0", "0"},
      {"reward.satisfied", Kind::Real, "0", "0"},
      {"reward.unsatisfied", Kind::Real, "0", "0"},

      {"train.seed", Kind::Count, "1", "1"},
      {"train.episodes", Kind::Count, "1000", "1000"},
      {"train.steps", Kind::Count, "300", "300"},
      {"train.batch", Kind::Count, "128", "128"},
      {"train.buffer", Kind::Count, "15000", "15000"},
      {"train.lr", Kind::Real, "0.001", "0.001"},
      {"train.gamma", Kind::Real, "0.999", "0.999"},
      {"train.sync_every", Kind::Count, "3000", "3000"},
      {"train.eps_start", Kind::Real, "0.9", "0.9"},
      {"train.eps_end", Kind::Real, "0.1", "0.1"},
      {"train.eps_decay", Kind::Real, "200", "200"},
      {"train.head", Kind::Choice, "dueling", "dueling", {"dueling", "vanilla"}},
      {"train.hidden", Kind::Count, "128", "128"},

      {"eval.steps", Kind::Count, "1000", "1000"},

      {"sweep.rmin_over_w", Kind::Reals, "0, 0.5, 1, 1.5, 2, 2.5, 3", "0, 0.5, 1, 1.5, 2, 2.5, 3"},
      {"sweep.window", Kind::Count, "100", "100"},
      {"sweep.eval_steps", Kind::Count, "1000", "1000"},

      {"layouts.count", Kind::Count, "100", "100"},
      {"layouts.steps", Kind::Count, "1000", "1000"},

      {"oracle.xy_step", Kind::Real, "5", "5"},
      {"oracle.heights", Kind::Heights, "coarse", "coarse"},
      {"oracle.alpha_step", Kind::Real, "0.05", "0.05"},
      {"oracle.omega_r", Kind::Real, "1", "1"},
      {"oracle.omega_f", Kind::Real, "0", "0"},
      {"oracle.r_min_over_w", Kind::RealOrAuto, "auto", "auto"},

      {"baseline.steps", Kind::Count, "1000", "1000"},
      {"baseline.strong_alpha", Kind::Real, "0.3", "0.3"},
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_real(std::string_view s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

bool parse_count(std::string_view s, long long& out) {
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return !t.empty() && ec == std::errc() && ptr == t.data() + t.size() && out >= 0;
}

std::vector<std::string> split(std::string_view s, std::string_view seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string_view::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& what, const std::string& value) {
  throw ConfigError(key + ": " + what + ", got '" + value + "'");
}

std::vector<double> reals(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& tok : split(value, ", \t")) {
    double v = 0.0;
    if (!parse_real(tok, v)) bad(key, "expected a list of numbers", value);
    out.push_back(v);
  }
  if (out.empty()) bad(key, "expected a non-empty list of numbers", value);
  return out;
}

std::vector<Vec2> users(const std::string& key, const std::string& value) {
  std::vector<Vec2> out;
  for (const auto& pair : split(value, ";")) {
    const auto xy = split(pair, ", \t");
    Vec2 p;
    if (xy.size() != 2 || !parse_real(xy[0], p.x) || !parse_real(xy[1], p.y)) {
      bad(key, "expected 'x y' pairs separated by ';'", value);
    }
    out.push_back(p);
  }
  if (out.empty()) bad(key, "expected at least one user", value);
  return out;
}

void check_value(const Field& f, const std::string& value) {
  double d = 0.0;
  long long n = 0;
  switch (f.kind) {
    case Kind::Real:
      if (!parse_real(value, d)) bad(f.key, "expected a number", value);
      break;
    case Kind::Count:
      if (!parse_count(value, n)) bad(f.key, "expected a non-negative integer", value);
      break;
    case Kind::Choice:
      if (std::find_if(f.choices.begin(), f.choices.end(), [&](const char* c) { return value == c; }) ==
          f.choices.end()) {
        std::string options;
        for (const char* c : f.choices) options += (options.empty() ? "" : "|") + std::string(c);
        bad(f.key, "expected one of " + options, value);
      }
      break;
    case Kind::Reals:
      reals(f.key, value);
      break;
    case Kind::Users:
      users(f.key, value);
      break;
    case Kind::RealOrAuto:
      if (value != "auto" && !parse_real(value, d)) bad(f.key, "expected a number or 'auto'", value);
      break;
    case Kind::Heights:
      if (value != "coarse") reals(f.key, value);
      break;
  }
}

std::string section_of(std::string_view key) { return std::string(key.substr(0, key.find('.'))); }

class Builder {
 public:
  explicit Builder(const std::map<std::string, std::string>& v) : v_(v) {}
  const std::string& text(const char* key) const { return v_.at(key); }
  double real(const char* key) const {
    double d = 0.0;
    parse_real(text(key), d);
    return d;
  }
  long long count(const char* key) const {
    long long n = 0;
    parse_count(text(key), n);
    return n;
  }

 private:
  const std::map<std::string, std::string>& v_;
};

}  // namespace

Resolved Resolved::parse(std::string_view ini_text, const std::vector<std::string>& overrides) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Resolved r;
  std::map<std::string, std::string> given;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string dotted = section + "." + key;
      if (!find_field(dotted)) throw ConfigError("unknown key " + dotted);
      given[dotted] = trim(value.data());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form section.key=value");
    const std::string key = trim(std::string_view(o).substr(0, eq));
    if (!find_field(key)) throw ConfigError("unknown key " + key);
    given[key] = trim(std::string_view(o).substr(eq + 1));
  }

  const auto spec_it = given.find("channel.spectrum");
  const std::string spectrum = spec_it == given.end() ? "sub6" : spec_it->second;
  check_value(fields().front(), spectrum);
  const bool mm = spectrum == "mmwave";
  for (const auto& f : fields()) {
    const char* fallback = mm ? f.mmwave : f.sub6;
    const auto it = given.find(f.key);
    if (!fallback) {
      if (it != given.end()) throw ConfigError(std::string(f.key) + " does not apply to spectrum " + spectrum);
      continue;
    }
    const std::string value = it == given.end() ? std::string(fallback) : it->second;
    check_value(f, value);
    r.values_[f.key] = value;
  }
  try {
    r.train().validate();
    r.grid().validate(r.scenario());
    if (r.baseline_alpha() < r.scenario().alpha_min || r.baseline_alpha() > r.scenario().alpha_max) {
      throw ConfigError("baseline.strong_alpha: outside [scenario.alpha_min, scenario.alpha_max]");
    }
    if (r.eval_steps() < 1 || r.sweep_eval_steps() < 1 || r.layout_steps() < 1 || r.baseline_steps() < 1) {
      throw ConfigError("step counts must be >= 1");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return r;
}

Resolved Resolved::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), overrides);
}

void Resolved::set(const std::string& dotted_key, const std::string& value) {
  if (dotted_key == "channel.spectrum") throw ConfigError("channel.spectrum cannot be changed after loading");
  if (!values_.count(dotted_key)) throw ConfigError("unknown key " + dotted_key);
  *this = parse(snapshot(), {dotted_key + "=" + value});
}

const std::string& Resolved::get(const std::string& dotted_key) const {
  const auto it = values_.find(dotted_key);
  if (it == values_.end()) throw ConfigError("unknown key " + dotted_key);
  return it->second;
}

std::string Resolved::snapshot() const {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    const auto it = values_.find(f.key);
    if (it == values_.end()) continue;
    const std::string s = section_of(f.key);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << std::string_view(f.key).substr(s.size() + 1) << " = " << it->second << '\n';
  }
  return out.str();
}

channel::ChannelParams Resolved::channel() const {
  const Builder b(values_);
  channel::ChannelParams p;
  p.carrier_hz = b.real("channel.carrier_hz");
  p.tx_power_w = channel::dbm_to_watt(b.real("channel.tx_power_dbm"));
  p.bandwidth_hz = b.real("channel.bandwidth_hz");
  p.noise_w = channel::dbm_to_watt(b.real("channel.noise_dbm"));
  p.los_c = b.real("channel.los_c");
  p.los_y = b.real("channel.los_y");
  p.n_uav = static_cast<int>(b.count("channel.n_uav"));
  p.n_ue = static_cast<int>(b.count("channel.n_ue"));
  if (b.text("channel.spectrum") == "mmwave") {
    p.loss = channel::MmWaveLoss{channel::db_to_linear(b.real("channel.intercept_los_db")),
                                 channel::db_to_linear(b.real("channel.intercept_nlos_db")),
                                 b.real("channel.exponent_los"), b.real("channel.exponent_nlos")};
  } else {
    p.loss = channel::Sub6Loss{b.real("channel.excess_los_db"), b.real("channel.excess_nlos_db"),
                               channel::deg_to_rad(b.real("channel.min_elevation_deg"))};
  }
  return p;
}

env::Scenario Resolved::scenario() const {
  const Builder b(values_);
  env::Scenario s;
  s.channel = channel();
  s.area_side = b.real("scenario.area_side");
  s.users = users("scenario.users", b.text("scenario.users"));
  s.h_min = b.real("scenario.h_min");
  s.h_max = b.real("scenario.h_max");
  s.h_init = b.real("scenario.h_init");
  s.alpha_init = b.real("scenario.alpha_init");
  s.step_x = b.real("scenario.step_x");
  s.step_y = b.real("scenario.step_y");
  s.step_h = b.real("scenario.step_h");
  s.step_alpha = b.real("scenario.step_alpha");
  s.alpha_min = b.real("scenario.alpha_min");
  s.alpha_max = b.real("scenario.alpha_max");
  const std::string& mode = b.text("scenario.link_mode");
  s.link_mode = mode == "always_los"       ? env::LinkMode::AlwaysLoS
                : mode == "expected"       ? env::LinkMode::Expected
                : mode == "bernoulli_step" ? env::LinkMode::BernoulliPerStep
                                           : env::LinkMode::BernoulliPerEpisode;
  s.r_min = b.real("scenario.r_min_over_w") * s.channel.bandwidth_hz;
  s.pairing = b.text("scenario.pairing") == "best_worst" ? env::PairingRule::BestWithWorst
                                                         : env::PairingRule::StrongHalfWithWeakHalf;
  if (b.text("scenario.gain_db_min") != "auto") s.gain_db_min = b.real("scenario.gain_db_min");
  if (b.text("scenario.gain_db_max") != "auto") s.gain_db_max = b.real("scenario.gain_db_max");
  return s;
}

env::RewardWeights Resolved::reward() const {
  const Builder b(values_);
  return {b.real("reward.rate"), b.real("reward.fairness"), b.real("reward.gain"), b.real("reward.satisfied"),
          b.real("reward.unsatisfied")};
}

std::uint64_t Resolved::seed() const { return static_cast<std::uint64_t>(Builder(values_).count("train.seed")); }

harness::TrainConfig Resolved::train() const {
  const Builder b(values_);
  harness::TrainConfig c;
  c.episodes = static_cast<int>(b.count("train.episodes"));
  c.steps = static_cast<int>(b.count("train.steps"));
  c.batch = static_cast<std::size_t>(b.count("train.batch"));
  c.buffer = static_cast<std::size_t>(b.count("train.buffer"));
  c.lr = b.real("train.lr");
  c.gamma = b.real("train.gamma");
  c.sync_every = b.count("train.sync_every");
  c.schedule = {b.real("train.eps_start"), b.real("train.eps_end"), b.real("train.eps_decay")};
  c.reward = reward();
  c.scenario = scenario();
  c.head = b.text("train.head") == "vanilla" ? nn::Head::Vanilla : nn::Head::Dueling;
  c.seed = seed();
  c.hidden = static_cast<std::size_t>(b.count("train.hidden"));
  return c;
}

int Resolved::eval_steps() const { return static_cast<int>(Builder(values_).count("eval.steps")); }
std::vector<double> Resolved::sweep_points() const { return reals("sweep.rmin_over_w", get("sweep.rmin_over_w")); }
std::size_t Resolved::sweep_window() const { return static_cast<std::size_t>(Builder(values_).count("sweep.window")); }
int Resolved::sweep_eval_steps() const { return static_cast<int>(Builder(values_).count("sweep.eval_steps")); }
std::size_t Resolved::layout_count() const { return static_cast<std::size_t>(Builder(values_).count("layouts.count")); }
int Resolved::layout_steps() const { return static_cast<int>(Builder(values_).count("layouts.steps")); }
int Resolved::baseline_steps() const { return static_cast<int>(Builder(values_).count("baseline.steps")); }
double Resolved::baseline_alpha() const { return Builder(values_).real("baseline.strong_alpha"); }

oracle::GridSpec Resolved::grid() const {
  const Builder b(values_);
  const env::Scenario s = scenario();
  oracle::GridSpec g = oracle::GridSpec::coarse(s);
  if (b.text("oracle.heights") != "coarse") g.heights = reals("oracle.heights", b.text("oracle.heights"));
  g.xy_step = b.real("oracle.xy_step");
  g.alpha_step = b.real("oracle.alpha_step");
  g.omega_r = b.real("oracle.omega_r");
  g.omega_f = b.real("oracle.omega_f");
  g.r_min = b.text("oracle.r_min_over_w") == "auto" ? s.r_min
                                                    : b.real("oracle.r_min_over_w") * s.channel.bandwidth_hz;
  return g;
}

std::string git_blob_hash(std::string_view text) {
  const std::string header = "blob " + std::to_string(text.size()) + '\0';
  const std::string blob = header + std::string(text);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &size, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < size; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace uavnoma::config
