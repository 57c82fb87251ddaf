#include "doobkit_cli/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "doobkit/errors.hpp"
#include "json.hpp"

namespace doobkit::cli {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ValidationError("model field '" + field + "': " + what);
}

double get_double(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(field, "expected a finite number");
  return v;
}

std::size_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_unsigned()) field_error(field, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) field_error(field, "expected a string");
  return j.get<std::string>();
}

const json& get_array(const json& j, const std::string& field) {
  if (!j.is_array()) field_error(field, "expected an array");
  return j;
}

std::vector<double> get_doubles(const json& j, const std::string& field) {
  std::vector<double> out;
  const json& arr = get_array(j, field);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(get_double(arr[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::size_t> get_counts(const json& j, const std::string& field) {
  std::vector<std::size_t> out;
  const json& arr = get_array(j, field);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(get_count(arr[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Applies `parse` to a value and re-labels its ValidationError with the field.
template <typename F>
auto with_field(const std::string& field, F&& parse) {
  try {
    return parse();
  } catch (const ValidationError& e) {
    field_error(field, e.what());
  }
}

std::set<std::string> allowed_parameters(ModelKind kind) {
  switch (kind) {
    case ModelKind::binary_tree: return {"steps", "up_prob", "scaling", "process", "rate"};
    case ModelKind::recombining_lattice: return {"process", "rate"};
    case ModelKind::poisson_lattice:
    case ModelKind::mc_poisson: return {"rate"};
    case ModelKind::mc_gaussian_walk_squared:
    case ModelKind::mc_gaussian_walk: return {};
    case ModelKind::explicit_listing: return {"probabilities", "times", "partitions", "values"};
  }
  return {};
}

ModelSpec from_json(const json& root) {
  if (!root.is_object()) throw ValidationError("model file: top level must be an object");
  for (const auto& [key, _] : root.items()) {
    if (key != "kind" && key != "parameters" && key != "known_compensator") {
      field_error(key, "unknown field");
    }
  }
  if (!root.contains("kind")) field_error("kind", "missing");
  ModelSpec spec;
  const std::string kind = get_string(root["kind"], "kind");
  spec.kind = with_field("kind", [&] { return parse_model_kind(kind); });

  const json params = root.contains("parameters") ? root["parameters"] : json::object();
  if (!params.is_object()) field_error("parameters", "expected an object");
  const auto allowed = allowed_parameters(spec.kind);
  for (const auto& [key, _] : params.items()) {
    if (!allowed.count(key)) field_error("parameters." + key, "not a parameter of kind " + kind);
  }
  auto has = [&](const char* k) { return params.contains(k); };
  auto path = [](const char* k) { return std::string("parameters.") + k; };

  if (spec.kind == ModelKind::binary_tree) {
    if (!has("steps")) field_error(path("steps"), "missing");
    spec.steps = get_count(params["steps"], path("steps"));
    if (has("up_prob")) spec.up_prob = get_double(params["up_prob"], path("up_prob"));
    if (has("scaling")) {
      const std::string s = get_string(params["scaling"], path("scaling"));
      spec.scaling = with_field(path("scaling"), [&] { return parse_step_scaling(s); });
    }
  }
  if (has("process")) {
    const std::string s = get_string(params["process"], path("process"));
    spec.functional = with_field(path("process"), [&] { return parse_walk_functional(s); });
  }
  if (has("rate")) spec.rate = get_double(params["rate"], path("rate"));

  if (spec.kind == ModelKind::explicit_listing) {
    for (const char* k : {"probabilities", "times", "partitions", "values"}) {
      if (!has(k)) field_error(path(k), "missing");
    }
    spec.probs = get_doubles(params["probabilities"], path("probabilities"));
    spec.times = get_doubles(params["times"], path("times"));
    const json& parts = get_array(params["partitions"], path("partitions"));
    for (std::size_t k = 0; k < parts.size(); ++k) {
      spec.partitions.push_back(get_counts(parts[k], path("partitions") + "[" + std::to_string(k) + "]"));
    }
    const json& vals = get_array(params["values"], path("values"));
    for (std::size_t k = 0; k < vals.size(); ++k) {
      spec.values.push_back(get_doubles(vals[k], path("values") + "[" + std::to_string(k) + "]"));
    }
  }

  if (root.contains("known_compensator")) {
    const std::string s = get_string(root["known_compensator"], "known_compensator");
    spec.known = with_field("known_compensator", [&] { return parse_known_compensator(s); });
  } else {
    spec.known = default_known_compensator(spec);
  }
  validate(spec);
  return spec;
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.what() reads "[json.exception.parse_error.101] parse error at line L, column C: ..."
    std::string msg = e.what();
    const auto at = msg.find("parse error");
    throw ValidationError("model file: " + (at == std::string::npos ? msg : msg.substr(at)));
  }
  return from_json(root);
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string dump_model(const ModelSpec& spec) {
  json root = json::object();
  root["kind"] = to_string(spec.kind);
  json params = json::object();
  switch (spec.kind) {
    case ModelKind::binary_tree:
      params["steps"] = spec.steps;
      params["up_prob"] = spec.up_prob;
      params["scaling"] = to_string(spec.scaling);
      params["process"] = to_string(spec.functional);
      params["rate"] = spec.rate;
      break;
    case ModelKind::recombining_lattice:
      params["process"] = to_string(spec.functional);
      params["rate"] = spec.rate;
      break;
    case ModelKind::poisson_lattice:
    case ModelKind::mc_poisson: params["rate"] = spec.rate; break;
    case ModelKind::mc_gaussian_walk_squared:
    case ModelKind::mc_gaussian_walk: break;
    case ModelKind::explicit_listing:
      params["probabilities"] = spec.probs;
      params["times"] = spec.times;
      params["partitions"] = spec.partitions;
      params["values"] = spec.values;
      break;
  }
  root["parameters"] = std::move(params);
  root["known_compensator"] = to_string(spec.known);
  return root.dump(2) + "\n";
}

}  // namespace doobkit::cli
