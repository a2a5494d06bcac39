#include "atm/stack_file.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "atm/errors.hpp"
#include "atm/models.hpp"
#include "atm/spectrum.hpp"

namespace atm {
namespace {

using nlohmann::json;

struct UnitEntry {
  const char* name;
  Dimension dim;
  double factor;
};

constexpr UnitEntry kUnits[] = {
    {"nm", Dimension::length, 1.0},
    {"A", Dimension::length, 0.1},
    {"nat", Dimension::length, 1.0},
    {"eV", Dimension::energy, 1.0 / kNaturalEnergyEv},
    {"meV", Dimension::energy, 1e-3 / kNaturalEnergyEv},
    {"nat", Dimension::energy, 1.0},
    {"1/nm", Dimension::inverse_length, 1.0},
    {"1/A", Dimension::inverse_length, 10.0},
    {"nat", Dimension::inverse_length, 1.0},
    {"m0", Dimension::mass, 1.0},
};

const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::length: return "length (nm, A, nat)";
    case Dimension::energy: return "energy (eV, meV, nat)";
    case Dimension::inverse_length: return "inverse length (1/nm, 1/A, nat)";
    case Dimension::mass: return "mass (m0)";
  }
  return "?";
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InputError((path.empty() ? "top level" : path) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(join(path, key) + ": unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(join(path, key) + ": missing");
  return *it;
}

std::string string_field(const json& obj, const std::string& path, const std::string& key) {
  const json& v = require(obj, path, key);
  if (!v.is_string()) throw InputError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

double quantity_value(const json& v, Dimension dim, const std::string& field) {
  if (v.is_number())
    throw InputError(field + ": needs an explicit unit, e.g. \"1.5 " +
                     std::string(dim == Dimension::length ? "nm" : dim == Dimension::energy ? "eV"
                                 : dim == Dimension::mass ? "m0" : "1/nm") + "\"");
  if (!v.is_string()) throw InputError(field + ": expected a quantity string");
  return parse_quantity(v.get<std::string>(), dim, field);
}

double quantity_field(const json& obj, const std::string& path, const std::string& key,
                      Dimension dim, std::optional<double> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw InputError(join(path, key) + ": missing");
  }
  return quantity_value(*it, dim, join(path, key));
}

double number_field(const json& obj, const std::string& path, const std::string& key,
                    std::optional<double> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw InputError(join(path, key) + ": missing");
  }
  if (!it->is_number()) throw InputError(join(path, key) + ": expected a plain number");
  return it->get<double>();
}

int count_field(const json& obj, const std::string& path, const std::string& key) {
  const json& v = require(obj, path, key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw InputError(join(path, key) + ": expected an integer >= 1");
  return static_cast<int>(v.get<long long>());
}

CoefficientSet build_medium(const json& m, const std::string& path) {
  const std::string model = string_field(m, path, "model");
  if (model == "effective_mass") {
    check_keys(m, path, {"model", "mass", "potential"});
    const double mass = quantity_field(m, path, "mass", Dimension::mass);
    if (!(mass > 0.0)) throw InputError(join(path, "mass") + ": must be positive");
    return effective_mass_medium(mass, quantity_field(m, path, "potential", Dimension::energy, 0.0));
  }
  if (model == "free_particle") {
    check_keys(m, path, {"model", "mass_scale"});
    const double s = number_field(m, path, "mass_scale", 1.0);
    if (!(s > 0.0)) throw InputError(join(path, "mass_scale") + ": must be positive");
    return free_particle(s);
  }
  if (model == "two_band_toy") {
    check_keys(m, path, {"model", "gap", "coupling", "offset"});
    const double gap = quantity_field(m, path, "gap", Dimension::energy);
    if (!(gap >= 0.0)) throw InputError(join(path, "gap") + ": must be non-negative");
    return two_band_toy(gap, quantity_field(m, path, "coupling", Dimension::inverse_length),
                        quantity_field(m, path, "offset", Dimension::energy, 0.0));
  }
  throw InputError(join(path, "model") + ": unknown model '" + model +
                   "' (expected effective_mass, free_particle or two_band_toy)");
}

Grid grid_field(const json& obj, const std::string& path, Dimension dim) {
  check_keys(obj, path, {"min", "max", "count"});
  Grid g;
  g.min = quantity_field(obj, path, "min", dim);
  g.max = quantity_field(obj, path, "max", dim);
  g.count = count_field(obj, path, "count");
  if (g.max < g.min) throw InputError(path + ": max is below min");
  if (g.count == 1 && g.max != g.min) throw InputError(path + ": count 1 needs min == max");
  return g;
}

Output parse_output(const json& v, const std::string& field) {
  if (!v.is_string()) throw InputError(field + ": expected a string");
  const std::string s = v.get<std::string>();
  for (Output o : {Output::t_blocks, Output::g_diagonal, Output::dos, Output::bound_states,
                   Output::transmission, Output::identity_report})
    if (s == output_name(o)) return o;
  throw InputError(field + ": unknown output '" + s + "'");
}

SweepSpec build_sweep(const json& s, Eigen::Index dim) {
  const std::string path = "sweep";
  check_keys(s, path,
             {"omega", "eta", "kappa", "outputs", "z_grid", "bound_bracket", "bound_tol",
              "identity_threshold"});
  SweepSpec spec;
  spec.omega = grid_field(require(s, path, "omega"), "sweep.omega", Dimension::energy);
  spec.eta = quantity_field(s, path, "eta", Dimension::energy, default_eta());
  if (!(spec.eta >= 0.0)) throw InputError("sweep.eta: must be >= 0");

  if (const auto it = s.find("kappa"); it != s.end()) {
    if (!it->is_array() || it->empty()) throw InputError("sweep.kappa: expected a non-empty list");
    spec.kappa.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string f = "sweep.kappa[" + std::to_string(i) + "]";
      const json& pair = (*it)[i];
      if (!pair.is_array() || pair.size() != 2) throw InputError(f + ": expected [kx, ky]");
      spec.kappa.push_back({quantity_value(pair[0], Dimension::inverse_length, f + "[0]"),
                            quantity_value(pair[1], Dimension::inverse_length, f + "[1]")});
    }
  }

  const json& outs = require(s, path, "outputs");
  if (!outs.is_array() || outs.empty()) throw InputError("sweep.outputs: expected a non-empty list");
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const Output o = parse_output(outs[i], "sweep.outputs[" + std::to_string(i) + "]");
    if (!spec.wants(o)) spec.outputs.push_back(o);
  }

  if (const auto it = s.find("z_grid"); it != s.end())
    spec.z_grid = grid_field(*it, "sweep.z_grid", Dimension::length);
  if (const auto it = s.find("bound_bracket"); it != s.end()) {
    if (!it->is_array() || it->size() != 2) throw InputError("sweep.bound_bracket: expected [lo, hi]");
    spec.bound_bracket = {quantity_value((*it)[0], Dimension::energy, "sweep.bound_bracket[0]"),
                          quantity_value((*it)[1], Dimension::energy, "sweep.bound_bracket[1]")};
    if (!(spec.bound_bracket->second > spec.bound_bracket->first))
      throw InputError("sweep.bound_bracket: hi must exceed lo");
  }
  spec.bound_tol = quantity_field(s, path, "bound_tol", Dimension::energy, 1e-10);
  if (!(spec.bound_tol > 0.0)) throw InputError("sweep.bound_tol: must be positive");
  spec.identity_threshold = number_field(s, path, "identity_threshold", 1e-8);
  if (!(spec.identity_threshold > 0.0)) throw InputError("sweep.identity_threshold: must be positive");

  const bool needs_green = spec.wants(Output::g_diagonal) || spec.wants(Output::dos);
  if (needs_green && !(spec.eta > 0.0))
    throw InputError("sweep.eta: must be > 0 when G-diagonal or DOS is requested");
  if (needs_green && !spec.z_grid)
    throw InputError("sweep.z_grid: required when G-diagonal or DOS is requested");
  if (spec.wants(Output::bound_states) && !spec.bound_bracket)
    throw InputError("sweep.bound_bracket: required when bound-states is requested");
  if (spec.wants(Output::transmission) && dim != 1)
    throw InputError("sweep.outputs: transmission is only available for N = 1 media");
  return spec;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StackFile build(const json& root) {
  check_keys(root, "", {"media", "layers", "sweep"});
  const json& media_json = require(root, "", "media");
  if (!media_json.is_object() || media_json.empty())
    throw InputError("media: expected a non-empty object");
  std::map<std::string, CoefficientSet> media;
  for (const auto& [name, m] : media_json.items()) {
    const std::string path = "media." + name;
    if (!m.is_object()) throw InputError(path + ": expected an object");
    media.emplace(name, build_medium(m, path));
  }
  auto lookup = [&](const std::string& name, const std::string& field) -> const CoefficientSet& {
    const auto it = media.find(name);
    if (it == media.end()) throw InputError(field + ": unknown medium '" + name + "'");
    return it->second;
  };

  const json& lj = require(root, "", "layers");
  check_keys(lj, "layers", {"left", "right", "stack"});
  const CoefficientSet& left = lookup(string_field(lj, "layers", "left"), "layers.left");
  const CoefficientSet& right = lookup(string_field(lj, "layers", "right"), "layers.right");
  std::vector<Layer> layers;
  if (const auto it = lj.find("stack"); it != lj.end()) {
    if (!it->is_array()) throw InputError("layers.stack: expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "layers.stack[" + std::to_string(i) + "]";
      const json& l = (*it)[i];
      check_keys(l, path, {"medium", "thickness", "label"});
      const double t = quantity_field(l, path, "thickness", Dimension::length);
      if (!(t > 0.0)) throw InputError(path + ".thickness: must be positive");
      const std::string label =
          l.contains("label") ? string_field(l, path, "label") : "layer" + std::to_string(i);
      layers.push_back(Layer{lookup(string_field(l, path, "medium"), path + ".medium"), t, label});
    }
  }
  for (const Layer& l : layers)
    if (l.medium.dim() != left.dim()) throw InputError("layers: media have different dimensions");
  if (right.dim() != left.dim()) throw InputError("layers: media have different dimensions");

  StackFile out{LayerStack(left, right, std::move(layers)), std::nullopt};
  if (const auto it = root.find("sweep"); it != root.end()) out.sweep = build_sweep(*it, left.dim());
  return out;
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dim, const std::string& field) {
  static const std::regex re(R"(^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)\s*(\S+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    throw InputError(field + ": malformed quantity '" + text + "' (expected '<number> <unit>')");
  const double value = std::strtod(m[1].str().c_str(), nullptr);
  const std::string unit = m[2].str();
  for (const UnitEntry& u : kUnits)
    if (u.dim == dim && unit == u.name) return value * u.factor;
  throw InputError(field + ": unit '" + unit + "' is not a " + dimension_name(dim));
}

const char* output_name(Output o) {
  switch (o) {
    case Output::t_blocks: return "T-blocks";
    case Output::g_diagonal: return "G-diagonal";
    case Output::dos: return "DOS";
    case Output::bound_states: return "bound-states";
    case Output::transmission: return "transmission";
    case Output::identity_report: return "identity-report";
  }
  return "?";
}

std::vector<double> Grid::points() const {
  std::vector<double> p(count);
  for (int i = 0; i < count; ++i)
    p[i] = count == 1 ? min : min + (max - min) * static_cast<double>(i) / (count - 1);
  return p;
}

bool SweepSpec::wants(Output o) const {
  return std::find(outputs.begin(), outputs.end(), o) != outputs.end();
}

double default_eta() {
  if (const char* env = std::getenv("ATM_DEFAULT_ETA")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v >= 0.0))
      throw InputError(std::string("ATM_DEFAULT_ETA: not a non-negative number: '") + env + "'");
    return v;
  }
  return 1e-6;
}

StackFile parse_stack_text(const std::string& text, const std::string& origin) {
  const json root = parse_json(text, origin);
  try {
    return build(root);
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

StackFile parse_stack_file(const std::filesystem::path& path) {
  return parse_stack_text(read_file(path), path.string());
}

std::string fibonacci_stack_text(int generation, const std::filesystem::path& file_a,
                                 const std::filesystem::path& file_b) {
  if (generation < 1) throw InputError("generation must be >= 1");
  const std::string text_a = read_file(file_a), text_b = read_file(file_b);
  for (const auto& [text, path] : {std::pair{&text_a, &file_a}, std::pair{&text_b, &file_b}}) {
    const StackFile f = parse_stack_text(*text, path->string());
    if (f.stack.layers().size() != 1)
      throw InputError(path->string() + ": layer files must contain exactly one layer");
  }
  const json a = parse_json(text_a, file_a.string());
  const json b = parse_json(text_b, file_b.string());

  json media = a["media"];
  json layer_a = a["layers"]["stack"][0];
  json layer_b = b["layers"]["stack"][0];
  const std::string b_name = layer_b["medium"].get<std::string>();
  const json& b_medium = b["media"][b_name];
  if (!media.contains(b_name)) {
    media[b_name] = b_medium;
  } else if (media[b_name] != b_medium) {
    media["b." + b_name] = b_medium;
    layer_b["medium"] = "b." + b_name;
  }

  json stack = json::array();
  for (char ch : fibonacci_word(generation)) stack.push_back(ch == 'A' ? layer_a : layer_b);

  json out;
  out["media"] = media;
  out["layers"] = {{"left", a["layers"]["left"]}, {"right", a["layers"]["right"]}, {"stack", stack}};
  if (a.contains("sweep")) out["sweep"] = a["sweep"];
  return out.dump(2) + "\n";
}

}  // namespace atm
