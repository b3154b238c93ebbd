#include "wwlab/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "wwlab/errors.hpp"

namespace wwlab {
namespace {

using boost::property_tree::ptree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  return v;
}

std::int64_t to_int(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
    throw ConfigError(where + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  if (!text.empty() && text[0] == '-') throw MalformedSpec(where + " must be nonnegative");
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
    throw ConfigError(where + ": expected an unsigned integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + text + "'");
}

// One INI section; every key must be consumed before finish().
class Section {
 public:
  Section(std::string name, const ptree& tree) : name_(std::move(name)) {
    for (const auto& [key, child] : tree) values_[key] = trim(child.data());
  }

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("[" + name_ + "] is missing key '" + key + "'");
    used_.insert(key);
    return it->second;
  }
  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  double real(const std::string& key) { return to_double(text(key), where(key)); }
  double real(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }
  std::int64_t integer(const std::string& key) { return to_int(text(key), where(key)); }
  std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }
  std::uint64_t u64(const std::string& key) { return to_u64(text(key), where(key)); }
  bool flag(const std::string& key, bool fallback) { return has(key) ? to_bool(text(key), where(key)) : fallback; }

  std::vector<std::string> names(const std::string& key) { return split_list(text(key)); }
  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(text(key))) out.push_back(to_double(item, where(key)));
    return out;
  }
  std::vector<std::int64_t> integers(const std::string& key) {
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(text(key))) out.push_back(to_int(item, where(key)));
    return out;
  }

  std::int64_t at_least(const std::string& key, std::int64_t fallback, std::int64_t lo) {
    const std::int64_t v = integer(key, fallback);
    if (v < lo) throw MalformedSpec(where(key) + " must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
    return v;
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(at_least(key, static_cast<std::int64_t>(fallback), 1));
  }

  void finish() const {
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) throw ConfigError("[" + name_ + "] has unknown key '" + key + "'");
  }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

class Document {
 public:
  explicit Document(const ptree& root) {
    for (const auto& [name, child] : root) {
      if (!child.data().empty() && child.empty())
        throw ConfigError("key '" + name + "' appears outside any section");
      sections_.emplace(name, &child);
    }
  }

  bool has(const std::string& name) const { return sections_.count(name) != 0; }

  Section take(const std::string& name) {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw ConfigError("missing section [" + name + "]");
    taken_.insert(name);
    return Section(name, *it->second);
  }

  void finish() const {
    for (const auto& [name, tree] : sections_)
      if (!taken_.count(name)) throw ConfigError("unknown or unreferenced section [" + name + "]");
  }

  nlohmann::json canonical() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, tree] : sections_) {
      nlohmann::json section = nlohmann::json::object();
      for (const auto& [key, child] : *tree) section[key] = trim(child.data());
      out[name] = std::move(section);
    }
    return out;
  }

 private:
  std::map<std::string, const ptree*> sections_;
  std::set<std::string> taken_;
};

std::optional<std::vector<double>> optional_reals(Section& s, const std::string& key) {
  if (!s.has(key)) return std::nullopt;
  return s.reals(key);
}

PartSpec parse_part(Section& s, std::string name, bool& inherits_seed, std::uint64_t) {
  PartSpec spec;
  spec.name = std::move(name);
  const std::string kind = s.text("kind");
  inherits_seed = false;
  if (kind == "cyclic") {
    const std::size_t n = s.count("N", 0);
    spec.kind = FinitePermutation::cyclic(n);
  } else if (kind == "permutation") {
    FinitePermutation p;
    for (std::int64_t v : s.integers("perm")) {
      if (v < 0) throw MalformedSpec(s.where("perm") + " entries must be >= 0");
      p.perm.push_back(static_cast<std::size_t>(v));
    }
    if (s.has("masses")) {
      const auto m = s.reals("masses");
      p.masses = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    } else {
      p.masses = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.perm.size()),
                                           p.perm.empty() ? 0.0 : 1.0 / static_cast<double>(p.perm.size()));
    }
    spec.kind = std::move(p);
  } else if (kind == "rotation") {
    spec.kind = CircleRotation{s.real("alpha"), s.count("M", 1024)};
  } else if (kind == "doubling") {
    spec.kind = DoublingMap{s.count("M", 1 << 16)};
  } else if (kind == "integer_shift") {
    spec.kind = IntegerShift{s.at_least("W", 10, 1)};
  } else if (kind == "boole") {
    BooleMap b{s.count("count", 100), s.real("range", 1e3), 0};
    if (s.has("seed"))
      b.seed = s.u64("seed");
    else
      inherits_seed = true;
    spec.kind = b;
  } else {
    throw ConfigError(s.where("kind") + ": unknown system kind '" + kind + "'");
  }
  if (s.has("hopf")) spec.hopf = parse_hopf_tag(s.text("hopf"));
  spec.density = optional_reals(s, "density");
  return spec;
}

SystemSpec parse_system(Document& doc, std::vector<bool>& inherits) {
  Section s = doc.take("system");
  SystemSpec spec;
  if (s.text("kind", "") == "union") {
    s.text("kind");
    spec.disjoint_union = true;
    for (const std::string& name : s.names("parts")) {
      Section part = doc.take("part." + name);
      bool inherit = false;
      spec.parts.push_back(parse_part(part, name, inherit, 0));
      inherits.push_back(inherit);
      part.finish();
    }
    if (spec.parts.empty()) throw MalformedSpec("[system] union needs at least one part");
  } else {
    bool inherit = false;
    spec.parts.push_back(parse_part(s, "", inherit, 0));
    inherits.push_back(inherit);
  }
  s.finish();
  return spec;
}

Complex complex_at(const std::vector<double>& re, const std::vector<double>& im, std::size_t i) {
  return {re[i], im.empty() ? 0.0 : im[i]};
}

Observable parse_observable(Document& doc, const std::string& section_name, int depth) {
  if (depth > 16) throw ConfigError("observable sections nest too deeply");
  Section s = doc.take(section_name);
  const std::string kind = s.text("kind");
  Observable out;
  if (kind == "character") {
    out = Observable::character(s.integer("k"));
  } else if (kind == "delta") {
    out = Observable::delta(s.integer("index"));
  } else if (kind == "interval") {
    out = Observable::interval(s.real("a"), s.real("b"));
  } else if (kind == "rational_decay") {
    out = Observable::rational_decay();
  } else if (kind == "tabulated") {
    const auto re = s.reals("values");
    const auto im = s.has("values_im") ? s.reals("values_im") : std::vector<double>{};
    if (!im.empty() && im.size() != re.size()) throw MalformedSpec(s.where("values_im") + " must match values");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_at(re, im, i);
    out = Observable::tabulated(std::move(v));
  } else if (kind == "constant") {
    out = Observable::constant({s.real("value"), s.real("value_im", 0.0)});
  } else if (kind == "combination") {
    const auto names = s.names("terms");
    const auto re = s.reals("coefficients");
    const auto im = s.has("coefficients_im") ? s.reals("coefficients_im") : std::vector<double>{};
    if (re.size() != names.size() || (!im.empty() && im.size() != names.size()))
      throw MalformedSpec(s.where("coefficients") + " needs one coefficient per term");
    std::vector<std::pair<Complex, Observable>> terms;
    for (std::size_t i = 0; i < names.size(); ++i)
      terms.emplace_back(complex_at(re, im, i), parse_observable(doc, "observable." + names[i], depth + 1));
    out = Observable::combination(std::move(terms));
  } else if (kind == "per_part") {
    std::vector<Observable> parts;
    for (const auto& name : s.names("parts")) parts.push_back(parse_observable(doc, "observable." + name, depth + 1));
    out = Observable::per_part(std::move(parts));
  } else {
    throw ConfigError(s.where("kind") + ": unknown observable kind '" + kind + "'");
  }
  s.finish();
  return out;
}

WeightSequence parse_weight(Section& s) {
  const std::string kind = s.text("kind");
  if (kind == "constant") return WeightSequence::constant();
  if (kind == "character") return WeightSequence::character(s.real("theta"));
  const auto re = s.reals("coefficients");
  const auto thetas = s.reals("thetas");
  const auto im = s.has("coefficients_im") ? s.reals("coefficients_im") : std::vector<double>{};
  if (re.size() != thetas.size() || (!im.empty() && im.size() != thetas.size()))
    throw MalformedSpec(s.where("coefficients") + " needs one coefficient per theta");
  TrigPoly poly;
  for (std::size_t i = 0; i < re.size(); ++i) poly.terms.emplace_back(complex_at(re, im, i), thetas[i]);
  if (kind == "trig_poly") return WeightSequence::trig_poly(poly.terms);
  if (kind != "besicovitch") throw ConfigError(s.where("kind") + ": unknown weight kind '" + kind + "'");
  const std::string perturbation = s.text("perturbation");
  if (perturbation == "power_decay") return WeightSequence::besicovitch(poly, PowerDecay{s.real("c", 1.0), s.real("s", 1.0)});
  if (perturbation == "sparse") return WeightSequence::besicovitch(poly, SparseBounded{s.real("bound", 1.0)});
  throw ConfigError(s.where("perturbation") + ": unknown perturbation '" + perturbation + "'");
}

WeightsSection parse_weights(Document& doc) {
  Section s = doc.take("weights");
  WeightsSection out;
  out.grid = s.at_least("grid", 0, 0);
  if (s.has("extra_theta")) out.extra_theta = s.reals("extra_theta");
  out.resonant = s.flag("resonant", false);
  if (s.has("list")) {
    for (const auto& name : s.names("list")) {
      Section w = doc.take("weight." + name);
      out.named.push_back(parse_weight(w));
      w.finish();
    }
  }
  if (s.flag("constant", false)) out.named.insert(out.named.begin(), WeightSequence::constant());
  s.finish();
  return out;
}

RunSection parse_run(Section& s) {
  RunSection run;
  run.n_max = s.at_least("n_max", run.n_max, 1);
  run.schedule = s.text("schedule", run.schedule);
  if (run.schedule == "arithmetic") {
    run.step = s.at_least("step", 1, 1);
  } else if (run.schedule == "explicit") {
    run.checkpoints = s.integers("checkpoints");
  } else if (run.schedule != "dyadic") {
    throw ConfigError(s.where("schedule") + ": expected dyadic, arithmetic or explicit");
  }
  run.selection = s.text("selection", run.selection);
  if (run.selection == "list") {
    for (std::int64_t id : s.integers("point_ids")) {
      if (id < 0) throw MalformedSpec(s.where("point_ids") + " entries must be >= 0");
      run.point_ids.push_back(static_cast<std::size_t>(id));
    }
  } else if (run.selection == "stride" || run.selection == "random") {
    run.points = s.count("points", run.points);
  } else if (run.selection != "all") {
    throw ConfigError(s.where("selection") + ": expected stride, random, all or list");
  }
  if (s.has("seed")) run.seed = s.u64("seed");
  run.threads = static_cast<int>(s.at_least("threads", 1, 1));
  return run;
}

EgorovSection parse_egorov(Section& s) {
  EgorovSection e;
  e.epsilon = s.real("epsilon", e.epsilon);
  e.delta = s.real("delta", e.delta);
  if (!(e.epsilon >= 0.0)) throw MalformedSpec(s.where("epsilon") + " must be >= 0");
  if (!(e.delta >= 0.0)) throw MalformedSpec(s.where("delta") + " must be >= 0");
  if (s.has("N")) e.N = s.at_least("N", 1, 1);
  return e;
}

SpectralSection parse_spectral(Section& s) {
  SpectralSection sp;
  sp.mode = s.text("mode", sp.mode);
  if (sp.mode != "exact" && sp.mode != "ergodic") throw ConfigError(s.where("mode") + ": expected exact or ergodic");
  sp.l_max = s.at_least("l_max", sp.l_max, 1);
  if (sp.mode == "ergodic") {
    for (std::int64_t id : s.integers("base_points")) {
      if (id < 0) throw MalformedSpec(s.where("base_points") + " entries must be >= 0");
      sp.base_points.push_back(static_cast<std::size_t>(id));
    }
    sp.orbit_n = s.at_least("orbit_n", 1024, 1);
  }
  sp.atom_n = s.at_least("atom_n", sp.l_max, 1);
  sp.theta_grid = s.at_least("theta_grid", 0, 0);
  if (s.has("extra_theta")) sp.extra_theta = s.reals("extra_theta");
  sp.wiener_m = s.has("wiener_m") ? s.integers("wiener_m") : std::vector<std::int64_t>{sp.l_max};
  for (std::int64_t m : sp.wiener_m)
    if (m < 0 || m > sp.l_max) throw MalformedSpec(s.where("wiener_m") + " entries must lie in [0, l_max]");
  if (sp.atom_n > sp.l_max) throw MalformedSpec(s.where("atom_n") + " must be <= l_max");
  sp.threshold = s.real("threshold", sp.threshold);
  sp.pd_trials = static_cast<int>(s.at_least("pd_trials", 0, 0));
  sp.pd_m = s.at_least("pd_m", std::min<std::int64_t>(sp.l_max, 32), 0);
  if (sp.pd_m > sp.l_max) throw MalformedSpec(s.where("pd_m") + " must be <= l_max");
  return sp;
}

VdcSection parse_vdc(Section& s) {
  VdcSection v;
  v.mode = s.text("mode", v.mode);
  if (v.mode != "random" && v.mode != "orbit") throw ConfigError(s.where("mode") + ": expected random or orbit");
  v.trials = static_cast<int>(s.at_least("trials", v.trials, 1));
  v.n_max = s.at_least("n_max", v.n_max, 1);
  v.m = s.at_least("m", v.m, -1);
  v.points = s.count("points", v.points);
  v.zero_case = s.flag("zero_case", v.zero_case);
  if (v.m >= v.n_max) throw MalformedSpec(s.where("m") + " must be <= n_max - 1");
  return v;
}

MaximalSection parse_maximal(Section& s) {
  MaximalSection mx;
  mx.mode = s.text("mode", mx.mode);
  if (mx.mode != "random" && mx.mode != "system") throw ConfigError(s.where("mode") + ": expected random or system");
  mx.cases = static_cast<int>(s.at_least("cases", mx.cases, 1));
  mx.max_states = s.count("max_states", mx.max_states);
  if (s.has("p")) {
    mx.p.clear();
    for (std::int64_t p : s.integers("p")) {
      if (p != 1 && p != 2) throw MalformedSpec(s.where("p") + " entries must be 1 or 2");
      mx.p.push_back(static_cast<int>(p));
    }
  }
  if (s.has("t")) mx.t = s.reals("t");
  for (double t : mx.t)
    if (!(t > 0.0)) throw MalformedSpec(s.where("t") + " entries must be > 0");
  if (s.has("n_max")) mx.n_max = s.integers("n_max");
  for (std::int64_t n : mx.n_max)
    if (n < 1) throw MalformedSpec(s.where("n_max") + " entries must be >= 1");
  if (mx.p.empty() || mx.t.empty() || mx.n_max.empty()) throw MalformedSpec("[maximal] lists must be non-empty");
  return mx;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("unreadable configuration: ") + e.message() + " at line " +
                      std::to_string(e.line()));
  }
  Document doc(root);
  ExperimentConfig config;
  config.canonical = doc.canonical();

  if (doc.has("run")) {
    Section s = doc.take("run");
    config.run = parse_run(s);
    s.finish();
  }
  if (doc.has("system")) config.system = parse_system(doc, config.boole_inherits_seed);
  if (doc.has("observable")) config.observable = parse_observable(doc, "observable", 0);
  if (doc.has("weights")) config.weights = parse_weights(doc);
  if (doc.has("egorov")) {
    Section s = doc.take("egorov");
    config.egorov = parse_egorov(s);
    s.finish();
  }
  if (doc.has("spectral")) {
    Section s = doc.take("spectral");
    config.spectral = parse_spectral(s);
    s.finish();
  }
  if (doc.has("vdc")) {
    Section s = doc.take("vdc");
    config.vdc = parse_vdc(s);
    s.finish();
  }
  if (doc.has("maximal")) {
    Section s = doc.take("maximal");
    config.maximal = parse_maximal(s);
    s.finish();
  }
  if (doc.has("output")) {
    Section s = doc.take("output");
    config.output_dir = s.text("directory", ".");
    s.finish();
  }
  doc.finish();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  return parse_config(in);
}

std::string config_digest(const ExperimentConfig& config) {
  const std::string text = config.canonical.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace wwlab
