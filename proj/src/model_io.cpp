#include "cftwin/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cftwin/error.hpp"

namespace cftwin {

using nlohmann::ordered_json;

namespace {

class Problems {
 public:
  void add(const std::string& path, const std::string& msg) { list_.push_back(path + ": " + msg); }
  void throw_if_any() const {
    if (list_.empty()) return;
    std::string msg;
    for (std::size_t i = 0; i < list_.size(); ++i) msg += (i ? "\n" : "") + list_[i];
    throw Error(ErrorKind::Validation, msg);
  }

 private:
  std::vector<std::string> list_;
};

bool is_int(const ordered_json& j) { return j.is_number_integer() || j.is_number_unsigned(); }

std::vector<VariableDef> read_variables(const ordered_json& root, const char* key, bool required, Problems& pr) {
  std::vector<VariableDef> out;
  if (!root.contains(key)) {
    if (required) pr.add(key, "missing");
    return out;
  }
  const auto& arr = root[key];
  if (!arr.is_array()) {
    pr.add(key, "expected an array");
    return out;
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    const auto& v = arr[i];
    if (!v.is_object()) {
      pr.add(where, "expected an object");
      continue;
    }
    VariableDef def;
    if (!v.contains("name") || !v["name"].is_string())
      pr.add(where + ".name", "expected a string");
    else
      def.name = v["name"].get<std::string>();
    if (!v.contains("domain") || !v["domain"].is_array()) {
      pr.add(where + ".domain", "expected an array of integers");
    } else {
      for (std::size_t k = 0; k < v["domain"].size(); ++k) {
        if (!is_int(v["domain"][k]))
          pr.add(where + ".domain[" + std::to_string(k) + "]", "expected an integer");
        else
          def.domain.push_back(v["domain"][k].get<int>());
      }
    }
    for (const auto& [k, _] : v.items())
      if (k != "name" && k != "domain") pr.add(where, "unknown key '" + k + "'");
    out.push_back(std::move(def));
  }
  return out;
}

std::optional<Rational> read_probability(const ordered_json& j, const std::string& where, Problems& pr) {
  try {
    if (j.is_number()) return rational_from_double(j.get<double>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const Error& e) {
    pr.add(where, e.what());
    return std::nullopt;
  }
  pr.add(where, "expected a number or a \"p/q\" string");
  return std::nullopt;
}

std::optional<std::vector<int>> parse_key(const std::string& key) {
  std::vector<int> out;
  if (key.empty()) return out;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      while (used < part.size() && part[used] == ' ') ++used;
      if (used != part.size()) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (key.back() == ',') return std::nullopt;
  return out;
}

std::string join_values(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

/// Row-order (last parent fastest) list of parent value tuples.
std::vector<std::vector<int>> parent_rows(const std::vector<const std::vector<int>*>& domains) {
  std::vector<std::vector<int>> rows{{}};
  for (const auto* dom : domains) {
    std::vector<std::vector<int>> next;
    for (const auto& r : rows)
      for (int v : *dom) {
        next.push_back(r);
        next.back().push_back(v);
      }
    rows = std::move(next);
  }
  return rows;
}

ScmDefinition read_definition(const ordered_json& root, Problems& pr) {
  ScmDefinition def;
  if (!root.is_object()) {
    pr.add("$", "expected a JSON object");
    return def;
  }
  static const std::set<std::string> known{"variables", "exogenous", "pmf", "mechanisms", "reward", "metadata"};
  for (const auto& [k, _] : root.items())
    if (!known.count(k)) pr.add("$", "unknown key '" + k + "'");

  def.endogenous = read_variables(root, "variables", true, pr);
  def.exogenous = read_variables(root, "exogenous", false, pr);
  std::map<std::string, const std::vector<int>*> domains;
  for (const auto& v : def.endogenous) domains.emplace(v.name, &v.domain);
  for (const auto& v : def.exogenous) domains.emplace(v.name, &v.domain);

  // pmf
  if (root.contains("pmf")) {
    const auto& pmf = root["pmf"];
    if (!pmf.is_object() || !pmf.contains("joint") || !pmf["joint"].is_array()) {
      pr.add("pmf", "expected {\"joint\": [...]}");
    } else {
      const auto& joint = pmf["joint"];
      for (std::size_t i = 0; i < joint.size(); ++i) {
        const std::string where = "pmf.joint[" + std::to_string(i) + "]";
        const auto& e = joint[i];
        if (!e.is_object() || !e.contains("p")) {
          pr.add(where, "expected {\"u\": {...}, \"p\": ...}");
          continue;
        }
        PmfEntry entry;
        const ordered_json empty = ordered_json::object();
        const auto& u = e.contains("u") ? e["u"] : empty;
        if (!u.is_object()) {
          pr.add(where + ".u", "expected an object");
          continue;
        }
        bool ok = true;
        for (const auto& x : def.exogenous) {
          if (!u.contains(x.name) || !is_int(u[x.name])) {
            pr.add(where + ".u." + x.name, "missing integer value");
            ok = false;
          } else {
            entry.values.push_back(u[x.name].get<int>());
          }
        }
        for (const auto& [k, _] : u.items()) {
          bool declared = false;
          for (const auto& x : def.exogenous) declared = declared || x.name == k;
          if (!declared) {
            pr.add(where + ".u", "'" + k + "' is not an exogenous variable");
            ok = false;
          }
        }
        auto p = read_probability(e["p"], where + ".p", pr);
        if (!p) ok = false;
        if (ok) {
          entry.p = *p;
          def.pmf.push_back(std::move(entry));
        }
      }
    }
  } else if (!def.exogenous.empty()) {
    pr.add("pmf", "missing");
  }

  // mechanisms
  if (!root.contains("mechanisms") || !root["mechanisms"].is_array()) {
    pr.add("mechanisms", "expected an array");
  } else {
    const auto& arr = root["mechanisms"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "mechanisms[" + std::to_string(i) + "]";
      const auto& m = arr[i];
      if (!m.is_object()) {
        pr.add(where, "expected an object");
        continue;
      }
      MechanismDef md;
      if (!m.contains("var") || !m["var"].is_string()) {
        pr.add(where + ".var", "expected a string");
        continue;
      }
      md.var = m["var"].get<std::string>();
      if (m.contains("parents")) {
        if (!m["parents"].is_array()) {
          pr.add(where + ".parents", "expected an array of names");
          continue;
        }
        for (const auto& p : m["parents"]) {
          if (!p.is_string())
            pr.add(where + ".parents", "expected an array of names");
          else
            md.parents.push_back(p.get<std::string>());
        }
      }
      for (const auto& [k, _] : m.items())
        if (k != "var" && k != "parents" && k != "table" && k != "expr") pr.add(where, "unknown key '" + k + "'");
      const bool has_table = m.contains("table"), has_expr = m.contains("expr");
      if (has_table == has_expr) {
        pr.add(where, "needs exactly one of \"table\" or \"expr\"");
        continue;
      }
      if (has_expr) {
        if (!m["expr"].is_string()) {
          pr.add(where + ".expr", "expected a string");
          continue;
        }
        md.expr = m["expr"].get<std::string>();
        def.mechanisms.push_back(std::move(md));
        continue;
      }
      const auto& table = m["table"];
      if (!table.is_object()) {
        pr.add(where + ".table", "expected an object keyed by parent values");
        continue;
      }
      std::vector<const std::vector<int>*> pdoms;
      bool known_parents = true;
      for (const auto& p : md.parents) {
        auto it = domains.find(p);
        if (it == domains.end())
          known_parents = false;
        else
          pdoms.push_back(it->second);
      }
      if (!known_parents) {
        def.mechanisms.push_back(std::move(md));  // Scm::create names the unknown parent
        continue;
      }
      std::map<std::vector<int>, int> given;
      bool ok = true;
      for (const auto& [k, v] : table.items()) {
        auto key = parse_key(k);
        if (!key || key->size() != md.parents.size()) {
          pr.add(where + ".table", "row key '" + k + "' does not list one value per parent");
          ok = false;
        } else if (!is_int(v)) {
          pr.add(where + ".table[\"" + k + "\"]", "expected an integer");
          ok = false;
        } else if (!given.emplace(*key, v.get<int>()).second) {
          pr.add(where + ".table", "row '" + k + "' given twice");
          ok = false;
        }
      }
      std::size_t used = 0;
      for (const auto& row : parent_rows(pdoms)) {
        auto it = given.find(row);
        if (it == given.end()) {
          pr.add(where + ".table", "missing row '" + join_values(row) + "'");
          ok = false;
        } else {
          md.table.push_back(it->second);
          ++used;
        }
      }
      if (used != given.size()) {
        pr.add(where + ".table", "rows outside the parents' domains");
        ok = false;
      }
      if (ok) def.mechanisms.push_back(std::move(md));
    }
  }

  // reward
  if (!root.contains("reward") || !root["reward"].is_object()) {
    pr.add("reward", "expected {\"var\": ..., \"map\": {...}}");
  } else {
    const auto& r = root["reward"];
    if (!r.contains("var") || !r["var"].is_string())
      pr.add("reward.var", "expected a string");
    else
      def.reward.var = r["var"].get<std::string>();
    if (!r.contains("map") || !r["map"].is_object()) {
      pr.add("reward.map", "expected an object from values to reals");
    } else {
      for (const auto& [k, v] : r["map"].items()) {
        auto key = parse_key(k);
        if (!key || key->size() != 1)
          pr.add("reward.map", "key '" + k + "' is not an integer");
        else if (!v.is_number())
          pr.add("reward.map[\"" + k + "\"]", "expected a number");
        else
          def.reward.map.emplace_back(key->front(), v.get<double>());
      }
    }
  }
  return def;
}

ordered_json variables_json(const std::vector<VariableDef>& vars) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : vars) arr.push_back({{"name", v.name}, {"domain", v.domain}});
  return arr;
}

ordered_json probability_json(const Rational& p) {
  const double d = to_double(p);
  if (rational_from_double(d) == p) {
    if (denominator(p) == 1) return ordered_json(numerator(p).convert_to<long long>());
    return ordered_json(d);
  }
  return ordered_json(to_string(p));
}

}  // namespace

ModelFile parse_model(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Validation, std::string("$: invalid JSON: ") + e.what());
  }
  Problems pr;
  ScmDefinition def = read_definition(root, pr);
  pr.throw_if_any();
  ModelFile out{Scm::create(std::move(def)), nullptr};
  if (root.contains("metadata")) out.metadata = root["metadata"];
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "error writing '" + path + "'");
}

ModelFile load_model(const std::string& path) { return parse_model(read_text_file(path)); }

ordered_json model_to_json(const Scm& scm, const ordered_json& metadata) {
  const ScmDefinition& def = scm.definition();
  ordered_json root;
  root["variables"] = variables_json(def.endogenous);
  root["exogenous"] = variables_json(def.exogenous);

  ordered_json joint = ordered_json::array();
  for (const auto& e : def.pmf) {
    ordered_json u = ordered_json::object();
    for (std::size_t k = 0; k < def.exogenous.size(); ++k) u[def.exogenous[k].name] = e.values[k];
    joint.push_back({{"u", u}, {"p", probability_json(e.p)}});
  }
  root["pmf"] = {{"joint", joint}};

  ordered_json mechs = ordered_json::array();
  for (const auto& md : def.mechanisms) {
    ordered_json m;
    m["var"] = md.var;
    m["parents"] = md.parents;
    if (md.expr) {
      m["expr"] = *md.expr;
    } else {
      std::vector<const std::vector<int>*> pdoms;
      std::vector<std::vector<int>> owned;
      owned.reserve(md.parents.size());
      for (const auto& p : md.parents) {
        const auto d = scm.domain(scm.id(p));
        owned.emplace_back(d.begin(), d.end());
      }
      for (const auto& d : owned) pdoms.push_back(&d);
      ordered_json table = ordered_json::object();
      const auto rows = parent_rows(pdoms);
      for (std::size_t r = 0; r < rows.size(); ++r) table[join_values(rows[r])] = md.table[r];
      m["table"] = table;
    }
    mechs.push_back(std::move(m));
  }
  root["mechanisms"] = mechs;

  ordered_json rmap = ordered_json::object();
  for (const auto& [v, r] : def.reward.map) rmap[std::to_string(v)] = r;
  root["reward"] = {{"var", def.reward.var}, {"map", rmap}};
  if (!metadata.is_null()) root["metadata"] = metadata;
  return root;
}

std::string dump_model(const Scm& scm, const ordered_json& metadata) {
  return model_to_json(scm, metadata).dump(2) + "\n";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto b = part.find_first_not_of(' ');
    const auto e = part.find_last_not_of(' ');
    out.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
  }
  if (text.back() == ',') out.emplace_back();
  return out;
}

namespace {

Policy named_policy(const Scm& scm, NodeId target, const std::string& spec) {
  const std::size_t n = scm.domain_size(target);
  if (spec == "flip") return Policy::flip(n);
  if (spec == "identity") return Policy::identity(n);
  if (spec.rfind("const:", 0) == 0) {
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(spec.substr(6), &used);
      if (used != spec.size() - 6) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Argument, "bad policy '" + spec + "': expected const:<integer>");
    }
    return Policy::constant(n, scm.value_index(target, value));
  }
  throw Error(ErrorKind::Argument, "unknown policy '" + spec + "' (expected flip, identity, const:<v> or a JSON file)");
}

Policy json_policy(const Scm& scm, NodeId target, const ordered_json& j) {
  const std::string& name = scm.name(target);
  const std::size_t n = scm.domain_size(target);
  if (is_int(j)) return Policy::constant(n, scm.value_index(target, j.get<int>()));
  if (!j.is_object()) throw Error(ErrorKind::Argument, "policy for '" + name + "' must be an integer or an object");
  Policy pol;
  pol.input = PolicyInput::Observed;
  pol.rows.assign(n, {});
  std::vector<bool> seen(n, false);
  for (const auto& [k, v] : j.items()) {
    auto key = parse_key(k);
    if (!key || key->size() != 1) throw Error(ErrorKind::Argument, "policy row key '" + k + "' for '" + name + "' is not a value");
    const auto row = static_cast<std::size_t>(scm.value_index(target, key->front()));
    seen[row] = true;
    if (is_int(v)) {
      pol.rows[row].assign(n, Probability::zero());
      pol.rows[row][static_cast<std::size_t>(scm.value_index(target, v.get<int>()))] = Probability::one();
    } else if (v.is_array() && v.size() == n) {
      Problems pr;
      for (std::size_t c = 0; c < n; ++c) {
        auto p = read_probability(v[c], name + "[\"" + k + "\"][" + std::to_string(c) + "]", pr);
        pol.rows[row].push_back(p ? Probability(*p) : Probability::zero());
      }
      pr.throw_if_any();
    } else {
      throw Error(ErrorKind::Argument, "policy row '" + k + "' for '" + name + "' must be a value or " +
                                           std::to_string(n) + " probabilities");
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    if (!seen[r])
      throw Error(ErrorKind::Argument, "policy for '" + name + "' has no row for value " +
                                           std::to_string(scm.value_at(target, static_cast<int>(r))));
  return pol;
}

}  // namespace

std::map<std::string, Policy> parse_policy_spec(const Scm& scm, std::span<const std::string> targets,
                                                const std::string& spec) {
  std::map<std::string, Policy> out;
  const bool is_file = spec.size() > 5 && spec.compare(spec.size() - 5, 5, ".json") == 0;
  if (is_file) {
    ordered_json j;
    try {
      j = ordered_json::parse(read_text_file(spec));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Argument, "policy file '" + spec + "': " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Argument, "policy file must hold an object keyed by target");
    for (const auto& t : targets) {
      if (!j.contains(t)) throw Error(ErrorKind::Argument, "policy file has no entry for '" + t + "'");
      out.emplace(t, json_policy(scm, scm.id(t), j[t]));
    }
    for (const auto& [k, _] : j.items())
      if (!out.count(k)) throw Error(ErrorKind::Argument, "policy file names '" + k + "', which is not a target");
    return out;
  }
  if (spec.find('=') == std::string::npos) {
    for (const auto& t : targets) out.emplace(t, named_policy(scm, scm.id(t), spec));
    return out;
  }
  for (const auto& item : split_list(spec)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Argument, "policy entry '" + item + "' is not NAME=POLICY");
    const std::string name = item.substr(0, eq);
    if (std::find(targets.begin(), targets.end(), name) == targets.end())
      throw Error(ErrorKind::Argument, "policy given for '" + name + "', which is not a target");
    if (!out.emplace(name, named_policy(scm, scm.id(name), item.substr(eq + 1))).second)
      throw Error(ErrorKind::Argument, "two policies given for '" + name + "'");
  }
  for (const auto& t : targets)
    if (!out.count(t)) throw Error(ErrorKind::Argument, "no policy given for '" + t + "'");
  return out;
}

}  // namespace cftwin
