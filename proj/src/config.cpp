#include "crbkit/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

#ifndef CRBKIT_PRESET_DIR
#define CRBKIT_PRESET_DIR "presets"
#endif

namespace crbkit {

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error("config error: field '" + field + "'" + (line > 0 ? " (line " + std::to_string(line) + ")" : "") +
                         ": " + message),
      field_(std::move(field)),
      line_(line) {}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fim: return "fim";
    case ExperimentKind::inequalities: return "inequalities";
    case ExperimentKind::crlb: return "crlb";
    case ExperimentKind::design: return "design";
    case ExperimentKind::mse: return "mse";
  }
  return "?";
}

ExperimentKind Config::kind() const {
  const std::string k = resolved.at("experiment").get<std::string>();
  for (auto e : {ExperimentKind::fim, ExperimentKind::inequalities, ExperimentKind::crlb, ExperimentKind::design,
                 ExperimentKind::mse})
    if (to_string(e) == k) return e;
  throw ConfigError("experiment", 0, "unknown experiment kind '" + k + "'");
}

namespace {

const std::vector<std::string> kChecks = {"cramer_rao",           "score_gap_identity", "isoperimetric",
                                          "worst_additive_noise", "de_bruijn",          "g_function"};
const std::vector<std::string> kCrlbChecks = {"calibration", "ordering", "whitening", "expected"};
const std::vector<std::string> kFamilies = {"gaussian", "laplace", "student_t", "gauss_mixture"};

class Validator {
 public:
  explicit Validator(const std::string& raw) : raw_(raw) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw ConfigError(path, line_of(path), msg);
  }

  // Line of the innermost key of `path`, searching each key after its parent.
  int line_of(const std::string& path) const {
    std::size_t pos = 0;
    bool found = false;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      const auto br = part.find('[');
      if (br != std::string::npos) part = part.substr(0, br);
      if (part.empty()) continue;
      const auto at = raw_.find("\"" + part + "\"", pos);
      if (at == std::string::npos) break;
      pos = at;
      found = true;
    }
    if (!found) return 0;
    return 1 + static_cast<int>(std::count(raw_.begin(), raw_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  void object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void allow(const json& j, const std::string& path, std::initializer_list<const char*> keys) const {
    object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) fail(join(path, it.key()), "unknown key");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  bool has(const json& j, const char* key) const { return j.contains(key) && !j.at(key).is_null(); }

  void require(const json& j, const std::string& path, const char* key) const {
    if (!has(j, key)) fail(join(path, key), "required field is missing");
  }

  long long integer(json& j, const std::string& path, const char* key, std::optional<long long> def, long long lo,
                    long long hi = std::numeric_limits<long long>::max()) const {
    const std::string p = join(path, key);
    if (!has(j, key)) {
      if (!def) fail(p, "required field is missing");
      j[key] = *def;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(p, "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                                      std::to_string(x));
    return x;
  }

  std::uint64_t unsigned64(json& j, const std::string& path, const char* key, std::uint64_t def) const {
    const std::string p = join(path, key);
    if (!has(j, key)) j[key] = def;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) fail(p, "must be a non-negative integer");
    fail(p, "expected an unsigned 64-bit integer");
  }

  double number(json& j, const std::string& path, const char* key, std::optional<double> def, double lo,
                bool lo_open = false, double hi = std::numeric_limits<double>::infinity()) const {
    const std::string p = join(path, key);
    if (!has(j, key)) {
      if (!def) fail(p, "required field is missing");
      j[key] = *def;
    }
    const json& v = j.at(key);
    if (!v.is_number()) fail(p, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || (lo_open && x == lo) || x > hi) fail(p, "value out of range");
    return x;
  }

  bool boolean(json& j, const std::string& path, const char* key, bool def) const {
    if (!has(j, key)) j[key] = def;
    if (!j.at(key).is_boolean()) fail(join(path, key), "expected true or false");
    return j.at(key).get<bool>();
  }

  std::string choice(json& j, const std::string& path, const char* key, std::optional<std::string> def,
                     const std::vector<std::string>& allowed) const {
    const std::string p = join(path, key);
    if (!has(j, key)) {
      if (!def) fail(p, "required field is missing");
      j[key] = *def;
    }
    if (!j.at(key).is_string()) fail(p, "expected a string");
    const std::string s = j.at(key).get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(p, "'" + s + "' is not one of {" + list + "}");
    }
    return s;
  }

  std::string string(json& j, const std::string& path, const char* key, const std::string& def) const {
    if (!has(j, key)) j[key] = def;
    if (!j.at(key).is_string()) fail(join(path, key), "expected a string");
    return j.at(key).get<std::string>();
  }

  std::vector<double> numbers(json& j, const std::string& path, const char* key,
                              std::optional<std::vector<double>> def, double lo_open) const {
    const std::string p = join(path, key);
    if (!has(j, key)) {
      if (!def) fail(p, "required field is missing");
      j[key] = *def;
    }
    const json& v = j.at(key);
    if (!v.is_array() || v.empty()) fail(p, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(p + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back()) || !(out.back() > lo_open))
        fail(p + "[" + std::to_string(i) + "]", "value out of range");
    }
    return out;
  }

  void real_matrix(const json& v, const std::string& p, long long dim) const {
    if (!v.is_array() || v.empty()) fail(p, "expected a square matrix as nested row arrays");
    const std::size_t n = v.size();
    if (dim > 0 && static_cast<long long>(n) != dim) fail(p, "expected " + std::to_string(dim) + " rows");
    for (std::size_t r = 0; r < n; ++r) {
      if (!v[r].is_array() || v[r].size() != n) fail(p + "[" + std::to_string(r) + "]", "row length must equal row count");
      for (const auto& x : v[r])
        if (!x.is_number()) fail(p + "[" + std::to_string(r) + "]", "expected numbers");
    }
  }

  void complex_number(const json& v, const std::string& p) const {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(p, "complex numbers are [re, im] pairs");
  }

  void complex_vector(const json& v, const std::string& p, long long len) const {
    if (!v.is_array()) fail(p, "expected an array of [re, im] pairs");
    if (len >= 0 && static_cast<long long>(v.size()) != len)
      fail(p, "expected " + std::to_string(len) + " entries, got " + std::to_string(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) complex_number(v[i], p + "[" + std::to_string(i) + "]");
  }

  void complex_matrix(const json& v, const std::string& p, long long dim) const {
    if (!v.is_array() || static_cast<long long>(v.size()) != dim) fail(p, "expected " + std::to_string(dim) + " rows");
    for (std::size_t r = 0; r < v.size(); ++r) complex_vector(v[r], p + "[" + std::to_string(r) + "]", dim);
  }

  // ---- blocks -------------------------------------------------------------

  void mixture(json& j, const std::string& p) const {
    allow(j, p, {"weights", "means", "variances", "standardize"});
    const auto w = numbers(j, p, "weights", std::nullopt, 0.0);
    const auto m = numbers(j, p, "means", std::nullopt, -std::numeric_limits<double>::infinity());
    const auto v = numbers(j, p, "variances", std::nullopt, 0.0);
    if (w.size() != m.size() || w.size() != v.size()) fail(p, "weights, means and variances must have equal length");
    boolean(j, p, "standardize", true);
  }

  void base_params(json& j, const std::string& p, const std::string& family) const {
    if (family == "student_t") number(j, p, "nu", 5.0, 2.0, true);
    if (family == "gauss_mixture") {
      if (!has(j, "mixture")) {
        j["mixture"] = {{"weights", {0.5, 0.5}}, {"means", {-1.0, 1.0}}, {"variances", {0.25, 0.25}}};
      }
      mixture(j["mixture"], join(p, "mixture"));
    }
  }

  void noise(json& j, const std::string& p) const {
    allow(j, p, {"family", "dim", "covariance", "shaping", "nu", "mixture"});
    const std::string fam = choice(j, p, "family", std::nullopt, kFamilies);
    long long dim = 0;
    if (has(j, "dim")) dim = integer(j, p, "dim", std::nullopt, 1, 64);
    if (has(j, "covariance")) {
      if (fam != "gaussian") fail(join(p, "covariance"), "only gaussian noise takes a covariance; use shaping");
      real_matrix(j["covariance"], join(p, "covariance"), dim);
      dim = static_cast<long long>(j["covariance"].size());
      if (has(j, "shaping")) fail(join(p, "shaping"), "give either covariance or shaping");
    } else {
      if (!has(j, "shaping")) j["shaping"] = "identity";
      const json& s = j["shaping"];
      if (s.is_string()) {
        choice(j, p, "shaping", std::nullopt, {"identity", "lower_triangular"});
        if (dim == 0) fail(join(p, "dim"), "required when shaping is named");
      } else {
        real_matrix(s, join(p, "shaping"), dim);
        dim = static_cast<long long>(s.size());
      }
    }
    if (has(j, "nu") && fam != "student_t") fail(join(p, "nu"), "only student_t takes nu");
    if (has(j, "mixture") && fam != "gauss_mixture") fail(join(p, "mixture"), "only gauss_mixture takes mixture");
    base_params(j, p, fam);
    j["dim"] = dim;
  }

  json noise_grid(json& g, const std::string& p) const {
    allow(g, p, {"families", "dims", "shapings", "nu", "mixture"});
    require(g, p, "families");
    require(g, p, "dims");
    if (!g["families"].is_array() || g["families"].empty()) fail(join(p, "families"), "expected a non-empty array");
    if (!g["dims"].is_array() || g["dims"].empty()) fail(join(p, "dims"), "expected a non-empty array");
    if (!has(g, "shapings")) g["shapings"] = {"identity"};
    json out = json::array();
    for (const auto& f : g["families"]) {
      if (!f.is_string()) fail(join(p, "families"), "expected family names");
      for (const auto& s : g["shapings"]) {
        for (const auto& d : g["dims"]) {
          json n = {{"family", f}, {"dim", d}, {"shaping", s}};
          if (f == "student_t" && has(g, "nu")) n["nu"] = g["nu"];
          if (f == "gauss_mixture" && has(g, "mixture")) n["mixture"] = g["mixture"];
          noise(n, p + "[" + std::to_string(out.size()) + "]");
          out.push_back(n);
        }
      }
    }
    return out;
  }

  void noises(json& cfg) const {
    if (has(cfg, "noise_grid")) {
      if (has(cfg, "noises")) fail("noises", "give either noises or noise_grid");
      cfg["noises"] = noise_grid(cfg["noise_grid"], "noise_grid");
      cfg.erase("noise_grid");
    }
    require(cfg, "", "noises");
    json& arr = cfg["noises"];
    if (!arr.is_array() || arr.empty()) fail("noises", "expected a non-empty array of noise blocks");
    for (std::size_t i = 0; i < arr.size(); ++i) noise(arr[i], "noises[" + std::to_string(i) + "]");
  }

  void channel_noise(json& j, const std::string& p, long long n) const {
    allow(j, p, {"family", "nu", "mixture", "complex_covariance", "snr_db"});
    const std::string fam = choice(j, p, "family", std::string("gaussian"), kFamilies);
    if (has(j, "nu") && fam != "student_t") fail(join(p, "nu"), "only student_t takes nu");
    if (has(j, "mixture") && fam != "gauss_mixture") fail(join(p, "mixture"), "only gauss_mixture takes mixture");
    base_params(j, p, fam);
    if (!has(j, "complex_covariance")) j["complex_covariance"] = json::object();
    json& c = j["complex_covariance"];
    const std::string cp = join(p, "complex_covariance");
    allow(c, cp, {"type", "variance", "rho", "value"});
    const std::string type = choice(c, cp, "type", std::string("white"), {"white", "ar1", "matrix"});
    if (type == "matrix") {
      require(c, cp, "value");
      complex_matrix(c["value"], join(cp, "value"), n);
      if (has(c, "variance") || has(c, "rho")) fail(cp, "matrix covariance takes only 'value'");
    } else {
      number(c, cp, "variance", 1.0, 0.0, true);
      if (type == "ar1") {
        number(c, cp, "rho", std::nullopt, -1.0, true, 1.0);
        if (c["rho"].get<double>() >= 1.0) fail(join(cp, "rho"), "must be < 1");
      } else if (has(c, "rho")) {
        fail(join(cp, "rho"), "only ar1 takes rho");
      }
      if (has(c, "value")) fail(join(cp, "value"), "only matrix covariance takes a value");
    }
    if (has(j, "snr_db")) number(j, p, "snr_db", std::nullopt, -200.0, false, 200.0);
  }

  void sequence(json& s, const std::string& p, long long n, long long m, std::uint64_t seed) const {
    allow(s, p, {"kind", "root", "seed", "samples", "frequencies"});
    const std::string kind = choice(s, p, "kind", std::nullopt, {"cazac", "random_psk", "all_ones", "inline", "tones"});
    auto only = [&](std::initializer_list<const char*> keys) {
      for (const char* k : {"root", "seed", "samples", "frequencies"}) {
        bool ok = false;
        for (const char* a : keys) ok = ok || std::string(a) == k;
        if (!ok && has(s, k)) fail(join(p, k), "not used by sequence kind '" + kind + "'");
      }
    };
    if (kind == "cazac") {
      only({"root", "seed"});
      integer(s, p, "root", 1, 1);
      unsigned64(s, p, "seed", seed);
    } else if (kind == "random_psk") {
      only({"seed"});
      unsigned64(s, p, "seed", seed);
    } else if (kind == "all_ones") {
      only({});
    } else if (kind == "inline") {
      only({"samples"});
      require(s, p, "samples");
      complex_vector(s["samples"], join(p, "samples"), n + m - 1);
    } else {
      only({"frequencies"});
      numbers(s, p, "frequencies", std::nullopt, -std::numeric_limits<double>::infinity());
    }
  }

  void channel(json& c, const std::string& p, std::uint64_t seed) const {
    allow(c, p, {"n", "m", "omega", "h", "sequence"});
    const long long n = integer(c, p, "n", std::nullopt, 1, 4096);
    const long long m = integer(c, p, "m", std::nullopt, 1, n);
    number(c, p, "omega", 0.0, -std::numeric_limits<double>::infinity());
    require(c, p, "h");
    complex_vector(c["h"], join(p, "h"), m);
    require(c, p, "sequence");
    sequence(c["sequence"], join(p, "sequence"), n, m, seed);
  }

  void grid(json& g, const std::string& p, long long m, std::uint64_t seed) const {
    allow(g, p, {"omegas", "taps", "h", "seed"});
    const double pi = 3.14159265358979323846;
    numbers(g, p, "omegas", std::vector<double>{-pi / 2, -pi / 4, 0.0, pi / 4, pi / 2},
            -std::numeric_limits<double>::infinity());
    if (has(g, "h")) {
      if (has(g, "taps")) fail(join(p, "taps"), "give either taps or h");
      if (!g["h"].is_array() || g["h"].empty()) fail(join(p, "h"), "expected a list of tap vectors");
      for (std::size_t i = 0; i < g["h"].size(); ++i) complex_vector(g["h"][i], join(p, "h") + "[" + std::to_string(i) + "]", m);
    } else {
      integer(g, p, "taps", 4, 1, 1000);
      unsigned64(g, p, "seed", seed);
    }
  }

  void design(json& d, const std::string& p, std::uint64_t seed) const {
    allow(d, p, {"name", "n", "m", "knowledge", "objective", "noise", "grid", "candidates", "count"});
    string(d, p, "name", "");
    const long long n = integer(d, p, "n", std::nullopt, 1, 4096);
    const long long m = integer(d, p, "m", std::nullopt, 1, n);
    choice(d, p, "knowledge", std::string("none"), {"full_distribution", "covariance_only", "none"});
    choice(d, p, "objective", std::string("trace_crlb"), {"trace_crlb", "max_crlb_entry", "min_fim_eigmin"});
    integer(d, p, "count", 20000, 1000);
    if (!has(d, "noise")) d["noise"] = json::object();
    channel_noise(d["noise"], join(p, "noise"), n);
    if (has(d["noise"], "snr_db")) fail(join(p, "noise.snr_db"), "not supported for design experiments");
    if (!has(d, "grid")) d["grid"] = json::object();
    grid(d["grid"], join(p, "grid"), m, seed);
    require(d, p, "candidates");
    json& c = d["candidates"];
    if (!c.is_array() || c.size() < 2) fail(join(p, "candidates"), "need at least 2 candidates");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string cp = join(p, "candidates") + "[" + std::to_string(i) + "]";
      allow(c[i], cp, {"id", "sequence"});
      require(c[i], cp, "id");
      if (!c[i]["id"].is_string()) fail(join(cp, "id"), "expected a string");
      require(c[i], cp, "sequence");
      sequence(c[i]["sequence"], join(cp, "sequence"), n, m, seed);
    }
  }

  void checks(json& cfg, const std::vector<std::string>& allowed) const {
    if (!has(cfg, "checks")) cfg["checks"] = allowed;
    json& c = cfg["checks"];
    if (!c.is_array() || c.empty()) fail("checks", "expected a non-empty array of check names");
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c[i].is_string() || std::find(allowed.begin(), allowed.end(), c[i].get<std::string>()) == allowed.end())
        fail("checks[" + std::to_string(i) + "]", "unknown check");
    }
  }

  void top(json& cfg) const {
    object(cfg, "");
    const std::string kind =
        choice(cfg, "", "experiment", std::nullopt, {"fim", "inequalities", "crlb", "design", "mse"});
    static const std::map<std::string, std::vector<std::string>> by_kind = {
        {"fim", {"noises", "noise_grid"}},
        {"inequalities",
         {"noises", "noise_grid", "checks", "sigma_z", "de_bruijn_t", "g_grid", "knn_count", "force_knn"}},
        {"crlb", {"channel", "noise", "checks", "random_specs", "expected_draws"}},
        {"design", {"designs"}},
        {"mse", {"channel", "noise", "estimator", "trials"}}};
    std::vector<std::string> keys = {"experiment", "name", "seed", "count", "tolerance_scale", "workers", "output"};
    const auto& extra = by_kind.at(kind);
    keys.insert(keys.end(), extra.begin(), extra.end());
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (std::find_if(keys.begin(), keys.end(), [&](const std::string& k) { return it.key() == k; }) == keys.end())
        fail(it.key(), "unknown key for experiment '" + kind + "'");

    string(cfg, "", "name", "");
    const std::uint64_t seed = unsigned64(cfg, "", "seed", 1);
    const long long count = integer(cfg, "", "count", 100000, 1);
    number(cfg, "", "tolerance_scale", 1.0, 0.0, true);
    integer(cfg, "", "workers", 0, 0, 4096);
    if (!has(cfg, "output")) cfg["output"] = json::object();
    allow(cfg["output"], "output", {"path", "format"});
    string(cfg["output"], "output", "path", "");
    choice(cfg["output"], "output", "format", std::string("csv"), {"csv", "json"});

    if (kind == "fim") {
      noises(cfg);
      if (count < 1000) fail("count", "Monte Carlo FIM needs count >= 1000");
    } else if (kind == "inequalities") {
      noises(cfg);
      if (count < 10000) fail("count", "inequality checks need count >= 10000");
      checks(cfg, kChecks);
      numbers(cfg, "", "sigma_z", std::vector<double>{0.1, 0.5, 1.0}, 0.0);
      number(cfg, "", "de_bruijn_t", 0.01, 0.0, true);
      const auto g = numbers(cfg, "", "g_grid", std::vector<double>{0.01, 0.05, 0.1}, 0.0);
      for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) fail("g_grid", "must be strictly ascending");
      integer(cfg, "", "knn_count", count, 10000);
      boolean(cfg, "", "force_knn", false);
    } else if (kind == "crlb" || kind == "mse") {
      require(cfg, "", "channel");
      channel(cfg["channel"], "channel", seed);
      const long long n = cfg["channel"]["n"].get<long long>();
      if (!has(cfg, "noise")) cfg["noise"] = json::object();
      channel_noise(cfg["noise"], "noise", n);
      if (kind == "crlb") {
        if (count < 1000) fail("count", "oracle FIM needs count >= 1000");
        checks(cfg, kCrlbChecks);
        if (!has(cfg, "random_specs")) cfg["random_specs"] = json::object();
        json& r = cfg["random_specs"];
        allow(r, "random_specs", {"count", "n_max", "m_max"});
        integer(r, "random_specs", "count", 20, 1, 10000);
        const long long nmax = integer(r, "random_specs", "n_max", 16, 3, 256);
        integer(r, "random_specs", "m_max", 3, 1, nmax / 2);
        integer(cfg, "", "expected_draws", 1000, 2);
      } else {
        if (!has(cfg, "estimator")) cfg["estimator"] = json::object();
        json& e = cfg["estimator"];
        allow(e, "estimator", {"grid_size", "refine_iters"});
        integer(e, "estimator", "grid_size", 256, 32, 1 << 20);
        integer(e, "estimator", "refine_iters", 100, 0, 10000);
        integer(cfg, "", "trials", 500, 100);
        const long long m = cfg["channel"]["m"].get<long long>();
        if (n < 2 * m + 1) fail("channel.n", "the estimator needs n >= 2m + 1");
      }
    } else if (kind == "design") {
      require(cfg, "", "designs");
      json& d = cfg["designs"];
      if (!d.is_array() || d.empty()) fail("designs", "expected a non-empty array of design blocks");
      for (std::size_t i = 0; i < d.size(); ++i) design(d[i], "designs[" + std::to_string(i) + "]", seed);
    }
  }

 private:
  const std::string& raw_;
};

// Puts the top-level keys in a fixed order so the echo is stable.
json canonical(const json& cfg) {
  static const std::vector<std::string> order = {"experiment", "name",   "seed",   "count", "tolerance_scale",
                                                 "workers",    "output", "noises", "checks"};
  json out = json::object();
  for (const auto& k : order)
    if (cfg.contains(k)) out[k] = cfg.at(k);
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (!out.contains(it.key())) out[it.key()] = it.value();
  return out;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte;
    const int line = 1 + static_cast<int>(std::count(text.begin(),
                                                     text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size())),
                                                     '\n'));
    throw ConfigError("<document>", line, std::string("malformed JSON: ") + e.what());
  }
  Config c;
  c.input = j;
  c.text = text;
  c.source = source;
  Validator(text).top(j);
  c.resolved = canonical(j);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string preset_dir() {
  if (const char* env = std::getenv("CRBKIT_PRESET_DIR"); env && *env) return env;
  return CRBKIT_PRESET_DIR;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(preset_dir(), ec))
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::string preset_path(const std::string& name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw std::runtime_error("unknown preset '" + name + "' (see `crbkit list`)");
  return (std::filesystem::path(preset_dir()) / (name + ".json")).string();
}

Config load_preset(const std::string& name) {
  Config c = load_config(preset_path(name));
  c.source = "preset:" + name;
  return c;
}

void apply_overrides(Config& cfg, const Overrides& o) {
  json j = cfg.input;
  if (o.seed) j["seed"] = *o.seed;
  if (o.workers) j["workers"] = *o.workers;
  if ((o.out || o.format) && (!j.contains("output") || j["output"].is_null())) j["output"] = json::object();
  if (o.out) j["output"]["path"] = *o.out;
  if (o.format) j["output"]["format"] = *o.format;
  if (o.tolerance_scale) j["tolerance_scale"] = *o.tolerance_scale;
  cfg.input = j;
  Validator(cfg.text).top(j);
  cfg.resolved = canonical(j);
}

std::uint64_t config_hash(const Config& cfg) {
  const std::string s = cfg.resolved.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace crbkit
