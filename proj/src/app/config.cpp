#include "cdlab/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cdlab/error.hpp"
#include "json.hpp"

namespace cdlab::app {

using nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys = {"family", "mus", "n", "n_grid", "engine",
                                             "reps", "seed", "output", "check"};
const std::set<std::string> kBlocks = {"G1", "G2", "B1", "two-valued"};

class Parser {
public:
  explicit Parser(const json& root) : root_(root) {}

  ExperimentConfig run() {
    if (!root_.is_object()) {
      fail("config: top level must be a JSON object");
      throw ConfigError(errors_);
    }
    for (const auto& [key, value] : root_.items()) {
      if (!kTopLevelKeys.contains(key)) fail("config: unknown key '" + key + "'");
    }
    ExperimentConfig config;
    parse_family(config);
    parse_mus(config);
    parse_sizes(config);
    parse_engine(config);
    config.reps = get_count(root_, "reps", "reps", 10000, 2);
    config.seed = get_seed(root_, "seed", "seed", 1);
    parse_output(config);
    parse_check(config);
    if (!errors_.empty()) throw ConfigError(errors_);
    build_canonical(config);
    return config;
  }

private:
  void fail(std::string message) { errors_.push_back(std::move(message)); }

  std::optional<double> get_number(const json& obj, const char* key, const std::string& where,
                                   bool required) {
    if (!obj.contains(key)) {
      if (required) fail(where + "." + key + ": required number is missing");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(where + "." + key + ": expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::size_t get_count(const json& obj, const char* key, const std::string& where,
                        std::size_t fallback, std::size_t minimum) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() < minimum) {
      fail(where + ": expected an integer >= " + std::to_string(minimum));
      return fallback;
    }
    return v.get<std::size_t>();
  }

  std::uint64_t get_seed(const json& obj, const char* key, const std::string& where,
                         std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
      fail(where + ": expected a non-negative integer seed");
      return fallback;
    }
    return v.get<std::uint64_t>();
  }

  void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.contains(key)) fail(where + ": unknown key '" + key + "'");
    }
  }

  void parse_family(ExperimentConfig& config) {
    if (!root_.contains("family") || !root_["family"].is_object()) {
      fail("family: required object is missing");
      return;
    }
    const json& f = root_["family"];
    const std::string kind = f.value("kind", "");
    try {
      if (kind == "gaussian-location" || kind == "gaussian-scale") {
        check_keys(f, "family", {"kind"});
        config.family = kind == "gaussian-location" ? Family::gaussian_location()
                                                    : Family::gaussian_scale();
      } else if (kind == "two-point") {
        check_keys(f, "family", {"kind", "base", "theta0", "theta1"});
        const std::string base = f.value("base", "");
        const auto t0 = get_number(f, "theta0", "family", true);
        const auto t1 = get_number(f, "theta1", "family", true);
        if (base != "gaussian-location" && base != "gaussian-scale") {
          fail("family.base: expected 'gaussian-location' or 'gaussian-scale'");
        } else if (t0 && t1) {
          config.family = Family::two_point(base == "gaussian-location" ? FamilyKind::GaussianLocation
                                                                        : FamilyKind::GaussianScale,
                                            *t0, *t1);
        }
      } else {
        fail("family.kind: expected one of gaussian-location, gaussian-scale, two-point");
      }
    } catch (const DomainError& e) {
      fail(std::string("family: ") + e.what());
    }
  }

  void parse_mus(ExperimentConfig& config) {
    if (!root_.contains("mus") || !root_["mus"].is_object()) {
      fail("mus: required object is missing");
      return;
    }
    const json& m = root_["mus"];
    const std::string gen = m.value("generator", "");
    if (gen == "explicit") {
      check_keys(m, "mus", {"generator", "values"});
      if (!m.contains("values") || !m["values"].is_array() || m["values"].empty()) {
        fail("mus.values: expected a non-empty array of numbers");
        return;
      }
      ExplicitMus e;
      for (const json& v : m["values"]) {
        if (!v.is_number()) {
          fail("mus.values: every entry must be a number");
          return;
        }
        e.values.push_back(v.get<double>());
      }
      config.mus = e;
    } else if (gen == "iid-uniform") {
      check_keys(m, "mus", {"generator", "A", "seed"});
      IidUniformMus u;
      if (auto a = get_number(m, "A", "mus", true)) {
        if (!(*a >= 0.0)) fail("mus.A: must be non-negative");
        u.half_width = *a;
      }
      u.seed = get_seed(m, "seed", "mus.seed", 0);
      config.mus = u;
    } else if (gen == "two-valued") {
      check_keys(m, "mus", {"generator", "mu0", "mu1", "gamma"});
      TwoValuedMus t;
      if (auto v = get_number(m, "mu0", "mus", true)) t.mu0 = *v;
      if (auto v = get_number(m, "mu1", "mus", true)) t.mu1 = *v;
      if (auto v = get_number(m, "gamma", "mus", true)) {
        if (!(*v >= 0.0 && *v <= 1.0)) fail("mus.gamma: must lie in [0, 1]");
        t.gamma = *v;
      }
      config.mus = t;
    } else if (gen == "constant") {
      check_keys(m, "mus", {"generator", "value"});
      ConstantMus c;
      if (auto v = get_number(m, "value", "mus", true)) c.value = *v;
      config.mus = c;
    } else {
      fail("mus.generator: expected one of explicit, iid-uniform, two-valued, constant");
    }
  }

  void parse_sizes(ExperimentConfig& config) {
    const bool has_n = root_.contains("n");
    const bool has_grid = root_.contains("n_grid");
    if (has_n && has_grid) {
      fail("n, n_grid: give one or the other");
      return;
    }
    if (has_n) {
      const std::size_t n = get_count(root_, "n", "n", 0, 1);
      if (n > 0) config.n_grid = {n};
    } else if (has_grid) {
      const json& g = root_["n_grid"];
      if (!g.is_array() || g.empty()) {
        fail("n_grid: expected a non-empty array of positive integers");
        return;
      }
      for (const json& v : g) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
          fail("n_grid: entries must be positive integers");
          return;
        }
        config.n_grid.push_back(v.get<std::size_t>());
      }
    } else if (const auto* e = std::get_if<ExplicitMus>(&config.mus)) {
      config.n_grid = {e->values.size()};
    } else {
      fail("n: required unless mus.generator is 'explicit'");
    }
    if (const auto* e = std::get_if<ExplicitMus>(&config.mus)) {
      for (std::size_t n : config.n_grid) {
        if (n != e->values.size()) fail("n: explicit multiset size does not match n");
      }
    }
  }

  void parse_engine(ExperimentConfig& config) {
    if (!root_.contains("engine")) return;
    const json& e = root_["engine"];
    if (!e.is_string() || !cdlab::parse_engine(e.get<std::string>())) {
      fail("engine: expected one of enum, permanent, two-valued");
      return;
    }
    config.engine = cdlab::parse_engine(e.get<std::string>());
  }

  void parse_output(ExperimentConfig& config) {
    if (!root_.contains("output")) return;
    const json& o = root_["output"];
    if (!o.is_object()) {
      fail("output: expected an object");
      return;
    }
    check_keys(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o["path"].is_string()) fail("output.path: expected a string");
      else config.output_path = o["path"].get<std::string>();
    }
    if (o.contains("format")) {
      const std::string f = o["format"].is_string() ? o["format"].get<std::string>() : "";
      if (f == "csv") config.format = OutputFormat::Csv;
      else if (f == "jsonl") config.format = OutputFormat::Jsonl;
      else fail("output.format: expected 'csv' or 'jsonl'");
    }
  }

  void parse_check(ExperimentConfig& config) {
    if (!root_.contains("check")) return;
    const json& c = root_["check"];
    if (!c.is_object()) {
      fail("check: expected an object");
      return;
    }
    check_keys(c, "check", {"blocks", "gamma", "reps", "doublings", "mu0", "mu1"});
    CheckSettings& s = config.check;
    if (c.contains("blocks")) {
      s.blocks.clear();
      if (!c["blocks"].is_array()) fail("check.blocks: expected an array");
      else {
        for (const json& b : c["blocks"]) {
          if (!b.is_string() || !kBlocks.contains(b.get<std::string>())) {
            fail("check.blocks: entries must be G1, G2, B1 or two-valued");
          } else {
            s.blocks.push_back(b.get<std::string>());
          }
        }
      }
    }
    if (auto g = get_number(c, "gamma", "check", false)) {
      if (!(*g > 0.0)) fail("check.gamma: must be positive");
      s.gamma = *g;
    }
    s.reps = get_count(c, "reps", "check.reps", s.reps, 2);
    s.doublings = get_count(c, "doublings", "check.doublings", s.doublings, 0);
    if (s.doublings > 20) fail("check.doublings: at most 20");
    s.mu0 = get_number(c, "mu0", "check", false);
    s.mu1 = get_number(c, "mu1", "check", false);
  }

  void build_canonical(ExperimentConfig& config) {
    json canon = root_;
    canon.erase("output");
    canon["seed"] = config.seed;
    canon["reps"] = config.reps;
    config.canonical = canon.dump();
  }

  const json& root_;
  std::vector<std::string> errors_;
};

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid config";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: not valid JSON: ") + e.what()});
  }
  return Parser(root).run();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open '" + path + "'"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  json canon = json::parse(config.canonical);
  canon["seed"] = seed;
  config.canonical = canon.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[static_cast<std::size_t>(k)] = kHex[h & 0xF];
  return out;
}

std::vector<ParameterMultiset> materialize_mus(const ExperimentConfig& config) {
  std::vector<ParameterMultiset> out;
  std::vector<std::string> errors;
  for (std::size_t n : config.n_grid) {
    try {
      ParameterMultiset mus = generate_mus(config.mus, n);
      mus.require_admissible(config.family);
      out.push_back(std::move(mus));
    } catch (const DomainError& e) {
      errors.push_back("mus (n = " + std::to_string(n) + "): " + e.what());
    } catch (const ContractError& e) {
      errors.push_back("mus (n = " + std::to_string(n) + "): " + e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

}  // namespace cdlab::app
