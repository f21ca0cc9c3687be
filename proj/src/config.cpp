#include "cachehier/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cachehier {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kModelKeys = {
    "tau",  "alpha", "beta",      "chi",          "mu",          "mu_n",
    "e_n",  "n_cores", "rho",     "d_d",          "d_t_coeff",   "noc_queue_form",
    "noc_queue_k", "noc_queue_saturation", "dram_queue_form", "dram_queue_k",
    "dram_queue_saturation"};
const std::set<std::string> kConstraintKeys = {"p_max", "m_d_max", "a_max", "m_s_max"};
const std::set<std::string> kSweepKeys = {"variable", "from", "to", "steps", "log_scale"};
const std::set<std::string> kPointKeys = {"depth", "a1", "a2", "a3"};
const std::set<std::string> kOutputKeys = {"csv"};

std::string trimmed(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trimmed(*v);
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

  std::optional<double> number(const std::string& key) const {
    const auto text = raw(key);
    if (!text) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
    if (ec != std::errc() || ptr != text->data() + text->size() || !std::isfinite(value))
      throw ConfigError(field(key) + ": invalid number '" + *text + "'");
    return value;
  }

  double required(const std::string& key) const {
    const auto v = number(key);
    if (!v) throw ConfigError(field(key) + ": missing required key");
    return *v;
  }

  std::optional<int> integer(const std::string& key) const {
    const auto text = raw(key);
    if (!text) return std::nullopt;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
    if (ec != std::errc() || ptr != text->data() + text->size())
      throw ConfigError(field(key) + ": invalid integer '" + *text + "'");
    return value;
  }

  std::optional<bool> boolean(const std::string& key) const {
    const auto text = raw(key);
    if (!text) return std::nullopt;
    if (*text == "true" || *text == "1" || *text == "yes") return true;
    if (*text == "false" || *text == "0" || *text == "no") return false;
    throw ConfigError(field(key) + ": invalid boolean '" + *text + "'");
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

void reject_unknown(const pt::ptree& tree, const std::string& name,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : tree) {
    if (!value.empty()) throw ConfigError(name + "." + key + ": unexpected nesting");
    if (!allowed.count(key)) throw ConfigError(name + "." + key + ": unknown key");
  }
}

QueueParams parse_queue(const Section& s, const std::string& prefix) {
  QueueParams q;
  q.form = QueueForm::Linear;
  if (const auto form = s.raw(prefix + "_form")) {
    try {
      q.form = queue_form_from_string(*form);
    } catch (const DomainError& e) {
      throw ConfigError(s.field(prefix + "_form") + ": " + e.what());
    }
  }
  q.k = s.number(prefix + "_k").value_or(0.0);
  if (q.form == QueueForm::MM1) {
    const auto sat = s.number(prefix + "_saturation");
    if (!sat) throw ConfigError(s.field(prefix + "_saturation") + ": required for mm1 queues");
    q.saturation = *sat;
  } else {
    q.saturation = s.number(prefix + "_saturation").value_or(1.0);
  }
  return q;
}

TechParams parse_model(const Section& s) {
  if (!s.present()) throw ConfigError("missing [model] section");
  TechParams p;
  p.tau = s.required("tau");
  p.alpha = s.required("alpha");
  p.beta = s.required("beta");
  p.chi = s.required("chi");
  p.mu = s.required("mu");
  p.mu_n = s.number("mu_n").value_or(0.0);
  p.e_n = s.number("e_n").value_or(1.0);
  p.n_cores = s.integer("n_cores").value_or(1);
  p.rho = s.required("rho");
  p.d_d = s.required("d_d");
  p.d_t_coeff = s.number("d_t_coeff").value_or(0.0);
  p.noc_q = parse_queue(s, "noc_queue");
  p.dram_q = parse_queue(s, "dram_queue");
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::string num(double v) { return fmt::format("{}", v); }

void write_queue(std::string& out, const std::string& prefix, const QueueParams& q) {
  out += fmt::format("{}_form = {}\n", prefix, to_string(q.form));
  out += fmt::format("{}_k = {}\n", prefix, num(q.k));
  out += fmt::format("{}_saturation = {}\n", prefix, num(q.saturation));
}

}  // namespace

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::AMax: return "a_max";
    case SweepVariable::PMax: return "p_max";
    case SweepVariable::MdMax: return "m_d_max";
    case SweepVariable::MsMax: return "m_s_max";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(std::string_view text) {
  if (text == "a_max") return SweepVariable::AMax;
  if (text == "p_max") return SweepVariable::PMax;
  if (text == "m_d_max") return SweepVariable::MdMax;
  if (text == "m_s_max") return SweepVariable::MsMax;
  throw ConfigError("sweep.variable: unknown variable '" + std::string(text) +
                    "' (expected a_max, p_max, m_d_max or m_s_max)");
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out(steps);
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / (steps - 1);
    out[i] = log_scale ? std::exp(std::log(from) + t * (std::log(to) - std::log(from)))
                       : from + t * (to - from);
  }
  out.front() = from;
  out.back() = to;
  return out;
}

ConstraintSet with_budget(ConstraintSet c, SweepVariable v, double value) {
  switch (v) {
    case SweepVariable::AMax: c.a_max = value; break;
    case SweepVariable::PMax: c.p_max = value; break;
    case SweepVariable::MdMax: c.m_d_max = value; break;
    case SweepVariable::MsMax: c.m_s_max = value; break;
  }
  return c;
}

ScenarioConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  const std::map<std::string, const std::set<std::string>*> sections = {
      {"model", &kModelKeys},
      {"constraints", &kConstraintKeys},
      {"sweep", &kSweepKeys},
      {"point", &kPointKeys},
      {"output", &kOutputKeys}};
  // read_ini drops empty sections, so headers are checked on the raw text too.
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto first = line.find_first_not_of(" \t");
    const auto last = line.find_last_not_of(" \t\r");
    if (first == std::string::npos || line[first] != '[' || line[last] != ']') continue;
    const std::string name = line.substr(first + 1, last - first - 1);
    if (!sections.contains(name)) throw ConfigError("unknown section [" + name + "]");
  }
  for (const auto& [name, sub] : tree) {
    const auto it = sections.find(name);
    if (it == sections.end())
      throw ConfigError(!sub.data().empty() ? "key '" + name + "' outside any section"
                                    : "unknown section [" + name + "]");
    if (!sub.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    reject_unknown(sub, name, *it->second);
  }
  const auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return Section(child ? &*child : nullptr, name);
  };

  ScenarioConfig c;
  c.model = parse_model(section("model"));

  const Section cons = section("constraints");
  c.constraints.p_max = cons.number("p_max");
  c.constraints.m_d_max = cons.number("m_d_max");
  c.constraints.a_max = cons.number("a_max");
  c.constraints.m_s_max = cons.number("m_s_max");
  try {
    c.constraints.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  const Section sweep = section("sweep");
  if (sweep.present()) {
    SweepSpec s;
    const auto var = sweep.raw("variable");
    if (!var) throw ConfigError("sweep.variable: missing required key");
    s.variable = sweep_variable_from_string(*var);
    s.from = sweep.required("from");
    s.to = sweep.required("to");
    const auto steps = sweep.integer("steps");
    if (!steps) throw ConfigError("sweep.steps: missing required key");
    s.steps = *steps;
    s.log_scale = sweep.boolean("log_scale").value_or(true);
    if (!(s.from > 0.0) || !(s.to > 0.0)) throw ConfigError("sweep.from/sweep.to: must be > 0");
    if (s.from == s.to) throw ConfigError("sweep.to: must differ from sweep.from");
    if (s.steps < 2) throw ConfigError("sweep.steps: must be >= 2");
    c.sweep = s;
  }

  const Section point = section("point");
  if (point.present()) {
    const auto depth = point.integer("depth");
    if (!depth) throw ConfigError("point.depth: missing required key");
    try {
      const Depth d = depth_from_levels(*depth);
      std::vector<double> a;
      for (int k = 1; k <= levels(d); ++k) a.push_back(point.required("a" + std::to_string(k)));
      for (int k = levels(d) + 1; k <= 3; ++k)
        if (point.raw("a" + std::to_string(k)))
          throw ConfigError("point.a" + std::to_string(k) + ": not used at depth " +
                            std::to_string(*depth));
      HierarchyPoint pt{d, a[0], a.size() > 1 ? a[1] : a[0], a.back()};
      pt.validate();
      c.point = pt;
    } catch (const DomainError& e) {
      throw ConfigError(std::string("point: ") + e.what());
    }
  }

  if (const auto csv = section("output").raw("csv")) c.output = *csv;
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string write_model_section(const TechParams& p) {
  std::string out = "[model]\n";
  out += fmt::format("tau = {}\n", num(p.tau));
  out += fmt::format("alpha = {}\n", num(p.alpha));
  out += fmt::format("beta = {}\n", num(p.beta));
  out += fmt::format("chi = {}\n", num(p.chi));
  out += fmt::format("mu = {}\n", num(p.mu));
  out += fmt::format("mu_n = {}\n", num(p.mu_n));
  out += fmt::format("e_n = {}\n", num(p.e_n));
  out += fmt::format("n_cores = {}\n", p.n_cores);
  out += fmt::format("rho = {}\n", num(p.rho));
  out += fmt::format("d_d = {}\n", num(p.d_d));
  out += fmt::format("d_t_coeff = {}\n", num(p.d_t_coeff));
  write_queue(out, "noc_queue", p.noc_q);
  write_queue(out, "dram_queue", p.dram_q);
  return out;
}

std::string write_config(const ScenarioConfig& c) {
  std::string out = write_model_section(c.model);
  out += "\n[constraints]\n";
  for (const ConstraintId id : kAllConstraints) {
    const auto limit = limit_of(c.constraints, id);
    if (!limit) continue;
    static constexpr const char* kNames[] = {"p_max", "m_d_max", "a_max", "m_s_max"};
    out += fmt::format("{} = {}\n", kNames[static_cast<int>(id)], num(*limit));
  }
  if (c.sweep) {
    out += "\n[sweep]\n";
    out += fmt::format("variable = {}\n", to_string(c.sweep->variable));
    out += fmt::format("from = {}\n", num(c.sweep->from));
    out += fmt::format("to = {}\n", num(c.sweep->to));
    out += fmt::format("steps = {}\n", c.sweep->steps);
    out += fmt::format("log_scale = {}\n", c.sweep->log_scale ? "true" : "false");
  }
  if (c.point) {
    out += "\n[point]\n";
    out += fmt::format("depth = {}\n", levels(c.point->depth));
    for (int k = 1; k <= levels(c.point->depth); ++k)
      out += fmt::format("a{} = {}\n", k, num(c.point->area(k)));
  }
  if (!c.output.empty()) out += fmt::format("\n[output]\ncsv = {}\n", c.output);
  return out;
}

std::string config_hash(const ScenarioConfig& c) {
  ScenarioConfig model_only = c;
  model_only.output.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : write_config(model_only)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cachehier
