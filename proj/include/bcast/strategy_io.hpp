#pragma once

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "bcast/model.hpp"
#include "bcast/runner.hpp"
#include "bcast/strategy.hpp"

// Strategy files are JSON objects tagged by "class":
//   markov, general   {alphabets, horizon, encoder[t][i], decoders{inner, outer}}
//   coordinator       {alphabets, horizon, rules[t][h]{encoder, inner}, outer}
//   structured        {alphabets, horizon, root}
// A structured node is {stage, atoms[{xi, weight}], action[atom][pair], children{"z": node}};
// horizon nodes omit the action. Probabilities are rational strings.

namespace bcast {

using AnyStrategy = std::variant<MarkovStrategy, GeneralStrategy, CoordinatorStrategy, StructuredStrategy<Rational>>;

namespace detail {

inline json alphabets_json(const Alphabets& a) {
  return {{"U", a.u}, {"V", a.v}, {"X", a.x}, {"Y", a.y}, {"Z", a.z}, {"Uhat", a.uhat}, {"Vhat", a.vhat}};
}

inline Alphabets alphabets_from(const json& j) {
  Alphabets a;
  a.u = size_field(j, "U", "alphabets");
  a.v = size_field(j, "V", "alphabets");
  a.x = size_field(j, "X", "alphabets");
  a.y = size_field(j, "Y", "alphabets");
  a.z = size_field(j, "Z", "alphabets");
  a.uhat = j.contains("Uhat") ? size_field(j, "Uhat", "alphabets") : a.u;
  a.vhat = j.contains("Vhat") ? size_field(j, "Vhat", "alphabets") : a.v;
  return a;
}

inline std::vector<std::vector<int>> int_tables(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of tables");
  try {
    return j.get<std::vector<std::vector<int>>>();
  } catch (const json::exception&) {
    throw SchemaError(path, "expected arrays of integers");
  }
}

inline json node_json(const PiNode<Rational>& node) {
  json atoms = json::array();
  for (const auto& e : node.pi.atoms) {
    json xi = json::array(), w = json::array();
    for (const auto& x : e.atom.xi.dist) xi.push_back(x.get_str());
    for (const auto& x : e.weight) w.push_back(x.get_str());
    atoms.push_back({{"xi", xi}, {"weight", w}});
  }
  json j = {{"stage", node.pi.stage}, {"atoms", atoms}};
  if (!node.action.empty()) j["action"] = node.action;
  json children = json::object();
  for (const auto& [z, child] : node.children) children[std::to_string(z)] = node_json(*child);
  j["children"] = children;
  return j;
}

inline std::shared_ptr<PiNode<Rational>> node_from(const json& j, const std::string& path) {
  auto node = std::make_shared<PiNode<Rational>>();
  const json& stage = field(j, "stage", path);
  if (!stage.is_number_integer()) throw SchemaError(path + ".stage", "expected an integer");
  node->pi.stage = stage.get<int>();
  const json& atoms = field(j, "atoms", path);
  if (!atoms.is_array()) throw SchemaError(path + ".atoms", "expected an array");
  AtomEncoder action;
  if (j.contains("action")) action = int_tables(j["action"], path + ".action");
  if (!action.empty() && action.size() != atoms.size())
    throw SchemaError(path + ".action", "one partial encoder per atom expected");
  std::vector<std::pair<typename BeliefPi<Rational>::Entry, PairEncoder>> entries;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const std::string p = path + ".atoms[" + std::to_string(k) + "]";
    BeliefXi<Rational> xi{vector(field(atoms[k], "xi", p), p + ".xi"), node->pi.stage};
    auto weight = vector(field(atoms[k], "weight", p), p + ".weight");
    entries.push_back({{XiAtom<Rational>::make(std::move(xi)), std::move(weight)},
                       action.empty() ? PairEncoder{} : action[k]});
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& l, const auto& r) { return l.first.atom.key < r.first.atom.key; });
  for (auto& [entry, enc] : entries) {
    node->pi.atoms.push_back(std::move(entry));
    if (!action.empty()) node->action.push_back(std::move(enc));
  }
  if (j.contains("children")) {
    const json& ch = j["children"];
    if (!ch.is_object()) throw SchemaError(path + ".children", "expected an object keyed by z");
    for (auto it = ch.begin(); it != ch.end(); ++it) {
      int z;
      try {
        z = std::stoi(it.key());
      } catch (const std::exception&) {
        throw SchemaError(path + ".children", "child key '" + it.key() + "' is not a symbol");
      }
      node->children[z] = node_from(it.value(), path + ".children." + it.key());
    }
  }
  return node;
}

template <class T>
std::shared_ptr<PiNode<T>> convert_node(const PiNode<Rational>& node) {
  auto out = std::make_shared<PiNode<T>>();
  out->pi.stage = node.pi.stage;
  for (const auto& e : node.pi.atoms) {
    std::vector<T> xi, w;
    for (const auto& x : e.atom.xi.dist) xi.push_back(scalar_traits<T>::from_rational(x));
    for (const auto& x : e.weight) w.push_back(scalar_traits<T>::from_rational(x));
    out->pi.atoms.push_back({XiAtom<T>::make({std::move(xi), e.atom.xi.stage}), std::move(w)});
  }
  out->action = node.action;
  for (const auto& [z, child] : node.children) out->children[z] = convert_node<T>(*child);
  return out;
}

}  // namespace detail

/// Re-expresses an exact structured strategy in another scalar type.
template <class T>
StructuredStrategy<T> convert(const StructuredStrategy<Rational>& s) {
  return {s.sizes, s.horizon, detail::convert_node<T>(*s.root)};
}

inline json strategy_to_json(const AnyStrategy& any) {
  using detail::alphabets_json;
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        json j = {{"alphabets", alphabets_json(s.sizes)}, {"horizon", s.horizon}};
        if constexpr (std::is_same_v<T, MarkovStrategy> || std::is_same_v<T, GeneralStrategy>) {
          j["class"] = std::is_same_v<T, MarkovStrategy> ? "markov" : "general";
          j["encoder"] = s.encoder;
          j["decoders"] = {{"inner", s.decoders.inner}, {"outer", s.decoders.outer}};
        } else if constexpr (std::is_same_v<T, CoordinatorStrategy>) {
          j["class"] = "coordinator";
          json rules = json::array();
          for (const auto& stage : s.rules) {
            json row = json::array();
            for (const auto& r : stage) row.push_back({{"encoder", r.encoder}, {"inner", r.inner}});
            rules.push_back(row);
          }
          j["rules"] = rules;
          j["outer"] = s.outer;
        } else {
          j["class"] = "structured";
          j["root"] = detail::node_json(*s.root);
        }
        return j;
      },
      any);
}

inline std::string strategy_hash(const AnyStrategy& s) { return hex_hash(strategy_to_json(s).dump()); }

inline AnyStrategy strategy_from_json(const json& j) {
  using namespace detail;
  const json& cls = field(j, "class", "");
  if (!cls.is_string()) throw SchemaError("class", "expected a string");
  const std::string c = cls.get<std::string>();
  const Alphabets a = alphabets_from(field(j, "alphabets", ""));
  const json& hz = field(j, "horizon", "");
  if (!hz.is_number_integer() || hz.get<int>() < 1) throw SchemaError("horizon", "expected a positive integer");
  const int T = hz.get<int>();
  try {
    if (c == "markov" || c == "general") {
      DecoderTables d;
      const json& dec = field(j, "decoders", "");
      d.inner = int_tables(field(dec, "inner", "decoders"), "decoders.inner");
      d.outer = int_tables(field(dec, "outer", "decoders"), "decoders.outer");
      auto enc = int_tables(field(j, "encoder", ""), "encoder");
      if (c == "markov") {
        MarkovStrategy s{a, T, std::move(enc), std::move(d)};
        check_strategy(s, a, T);
        return s;
      }
      GeneralStrategy s{a, T, std::move(enc), std::move(d)};
      check_strategy(s, a, T);
      return s;
    }
    if (c == "coordinator") {
      CoordinatorStrategy s{a, T, {}, int_tables(field(j, "outer", ""), "outer")};
      const json& rules = field(j, "rules", "");
      if (!rules.is_array()) throw SchemaError("rules", "expected one array per stage");
      for (std::size_t t = 0; t < rules.size(); ++t) {
        std::vector<PartialFunctions> stage;
        for (std::size_t h = 0; h < rules[t].size(); ++h) {
          const std::string p = "rules[" + std::to_string(t) + "][" + std::to_string(h) + "]";
          const json& r = rules[t][h];
          stage.push_back({field(r, "encoder", p).get<PairEncoder>(), field(r, "inner", p).get<std::vector<int>>()});
        }
        s.rules.push_back(std::move(stage));
      }
      check_strategy(s, a, T);
      return s;
    }
    if (c == "structured") return StructuredStrategy<Rational>{a, T, node_from(field(j, "root", ""), "root")};
  } catch (const std::invalid_argument& e) {
    throw ModelError("", e.what());
  } catch (const json::exception& e) {
    throw SchemaError("", e.what());
  }
  throw SchemaError("class", "unknown strategy class '" + c + "'");
}

inline AnyStrategy load_strategy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open strategy file '" + path + "'");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed strategy file: ") + e.what());
  }
  return strategy_from_json(raw);
}

inline std::string strategy_class(const AnyStrategy& s) {
  static const char* names[] = {"markov", "general", "coordinator", "structured"};
  return names[s.index()];
}

/// Runnable form of any stored strategy against a model in arithmetic S.
template <class S>
std::unique_ptr<Executable> make_executable(const AnyStrategy& any, const SystemModel<S>& m) {
  return std::visit(
      [&](const auto& s) -> std::unique_ptr<Executable> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, StructuredStrategy<Rational>>) {
          if constexpr (std::is_same_v<S, Rational>)
            return make_executable(s, m);
          else
            return make_executable(convert<S>(s), m);
        } else {
          return make_executable(s, m);
        }
      },
      any);
}

}  // namespace bcast
