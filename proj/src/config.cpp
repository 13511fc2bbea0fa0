#include "nfet/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "nfet/error.hpp"
#include "nfet/fisher.hpp"

namespace nfet::config {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
  return v;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

// Value given in exactly one of two units; `conv` maps the first unit to the second.
template <typename Conv>
double either(const json& obj, const std::string& where, const char* alt_key, const char* si_key, Conv conv,
              double fallback) {
  const bool has_alt = obj.contains(alt_key);
  const bool has_si = obj.contains(si_key);
  if (has_alt && has_si) {
    throw ConfigError(where + ": give only one of '" + alt_key + "' and '" + si_key + "'");
  }
  if (has_alt) return conv(number(obj.at(alt_key), where + "." + alt_key));
  if (has_si) return number(obj.at(si_key), where + "." + si_key);
  return fallback;
}

cplx complex_value(const json& j, const std::string& where) {
  if (j.is_number()) return {number(j, where), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
  throw ConfigError(where + ": expected a number or [re, im]");
}

std::vector<cplx> read_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("target.profile: cannot open '" + path.string() + "'");
  std::vector<cplx> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    double re = 0.0, im = 0.0;
    if (!(ss >> re)) {
      throw ConfigError("target.profile: " + path.string() + ":" + std::to_string(lineno) + ": expected re[,im]");
    }
    ss >> im;
    out.emplace_back(re, im);
  }
  return out;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }
double watt_to_dbw(double w) { return 10.0 * std::log10(w); }
double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (num_elements < 2) fail("array.num_elements must be at least 2");
  if (!(carrier_freq > 0.0) || !std::isfinite(carrier_freq)) fail("array.carrier_freq must be positive");
  try {
    geometry::EtParams::make(target.x_c, target.y_c, target.phi, target.length, target.width);
  } catch (const DomainError& e) {
    fail(std::string("target: ") + e.what());
  }
  if (layout.outer < 0 || layout.inner < 0) fail("target.layout: ring counts must be non-negative");
  if (layout.center != 0 && layout.center != 1) fail("target.layout.center must be 0 or 1");
  if (!(layout.inner_scale > 0.0 && layout.inner_scale < 1.0)) fail("target.layout.inner_scale must be in (0, 1)");
  if (layout.count() < 1) fail("target.layout: at least one scattering point is needed");
  if (!profile.empty() && static_cast<int>(profile.size()) != layout.count()) {
    fail("target.profile has " + std::to_string(profile.size()) + " entries, layout has " +
         std::to_string(layout.count()) + " points");
  }
  for (size_t k = 0; k < users.size(); ++k) {
    const auto& u = users[k];
    const std::string w = "users[" + std::to_string(k) + "]";
    if (!(u.range > 0.0) || !std::isfinite(u.range)) fail(w + ".range must be positive");
    if (!std::isfinite(u.angle) || std::abs(u.angle) >= kPi / 2) fail(w + ".angle must lie in (-90, 90) degrees");
    if (!std::isfinite(std::abs(u.gain)) || std::abs(u.gain) == 0.0) fail(w + ".gain must be finite and non-zero");
    if (!(u.sinr_target > 0.0) || !std::isfinite(u.sinr_target)) fail(w + ".sinr must be positive and finite");
  }
  if (!(power_budget > 0.0) || !std::isfinite(power_budget)) fail("power.p_max must be positive");
  if (!(comm_noise > 0.0) || !std::isfinite(comm_noise)) fail("power.comm_noise must be positive");
  if (!(sensing_noise > 0.0) || !std::isfinite(sensing_noise)) fail("power.sensing_noise must be positive");
  if (snapshots < 1) fail("snapshots must be at least 1");
  if (!(subspace_tol > 0.0 && subspace_tol < 1.0)) fail("subspace_tol must be in (0, 1)");
  if (!(solver.feasibility_tol > 0.0) || !(solver.gap_tol > 0.0)) fail("solver tolerances must be positive");
  if (solver.max_iterations < 1) fail("solver.max_iterations must be at least 1");
}

ScenarioConfig from_json(const json& doc, const std::filesystem::path& base_dir) {
  ScenarioConfig cfg;
  require_object(doc, "config", {"array", "target", "users", "power", "snapshots", "subspace_tol", "solver", "seed"});

  if (doc.contains("array")) {
    const json& a = doc.at("array");
    require_object(a, "array", {"num_elements", "carrier_freq_ghz", "carrier_freq_hz"});
    if (a.contains("num_elements")) cfg.num_elements = integer(a.at("num_elements"), "array.num_elements");
    cfg.carrier_freq = either(a, "array", "carrier_freq_ghz", "carrier_freq_hz", [](double g) { return g * 1e9; },
                              cfg.carrier_freq);
  }

  if (doc.contains("target")) {
    const json& t = doc.at("target");
    require_object(t, "target", {"x_c", "y_c", "phi_deg", "phi_rad", "length", "width", "layout", "profile"});
    if (t.contains("x_c")) cfg.target.x_c = number(t.at("x_c"), "target.x_c");
    if (t.contains("y_c")) cfg.target.y_c = number(t.at("y_c"), "target.y_c");
    cfg.target.phi = either(t, "target", "phi_deg", "phi_rad", deg_to_rad, cfg.target.phi);
    if (t.contains("length")) cfg.target.length = number(t.at("length"), "target.length");
    if (t.contains("width")) cfg.target.width = number(t.at("width"), "target.width");
    if (t.contains("layout")) {
      const json& l = t.at("layout");
      require_object(l, "target.layout", {"outer", "inner", "center", "inner_scale"});
      if (l.contains("outer")) cfg.layout.outer = integer(l.at("outer"), "target.layout.outer");
      if (l.contains("inner")) cfg.layout.inner = integer(l.at("inner"), "target.layout.inner");
      if (l.contains("center")) cfg.layout.center = integer(l.at("center"), "target.layout.center");
      if (l.contains("inner_scale")) cfg.layout.inner_scale = number(l.at("inner_scale"), "target.layout.inner_scale");
    }
    if (t.contains("profile")) {
      const json& p = t.at("profile");
      if (p.is_string()) {
        if (p.get<std::string>() != "unit") throw ConfigError("target.profile: the only named profile is \"unit\"");
      } else if (p.is_array()) {
        for (size_t m = 0; m < p.size(); ++m) cfg.profile.push_back(complex_value(p[m], "target.profile[" + std::to_string(m) + "]"));
      } else if (p.is_object()) {
        require_object(p, "target.profile", {"file"});
        if (!p.contains("file") || !p.at("file").is_string()) throw ConfigError("target.profile.file: expected a path");
        std::filesystem::path f = p.at("file").get<std::string>();
        if (f.is_relative()) f = base_dir / f;
        cfg.profile = read_profile_file(f);
      } else {
        throw ConfigError("target.profile: expected \"unit\", an array or {\"file\": path}");
      }
    }
  }

  if (doc.contains("users")) {
    const json& us = doc.at("users");
    if (!us.is_array()) throw ConfigError("users: expected an array");
    cfg.users.clear();
    for (size_t k = 0; k < us.size(); ++k) {
      const std::string w = "users[" + std::to_string(k) + "]";
      const json& u = us[k];
      require_object(u, w, {"range", "angle_deg", "angle_rad", "gain", "sinr_db", "sinr"});
      geometry::UserSpec spec;
      if (!u.contains("range")) throw ConfigError(w + ".range is required");
      spec.range = number(u.at("range"), w + ".range");
      if (!u.contains("angle_deg") && !u.contains("angle_rad")) throw ConfigError(w + ": an angle is required");
      spec.angle = either(u, w, "angle_deg", "angle_rad", deg_to_rad, 0.0);
      if (u.contains("gain")) spec.gain = complex_value(u.at("gain"), w + ".gain");
      spec.sinr_target = either(u, w, "sinr_db", "sinr", db_to_linear, db_to_linear(15.0));
      cfg.users.push_back(spec);
    }
  }

  if (doc.contains("power")) {
    const json& p = doc.at("power");
    require_object(p, "power", {"p_max_dbw", "p_max_w", "comm_noise_dbm", "comm_noise_w", "sensing_noise_dbm",
                                "sensing_noise_w"});
    cfg.power_budget = either(p, "power", "p_max_dbw", "p_max_w", dbw_to_watt, cfg.power_budget);
    cfg.comm_noise = either(p, "power", "comm_noise_dbm", "comm_noise_w", dbm_to_watt, cfg.comm_noise);
    cfg.sensing_noise = either(p, "power", "sensing_noise_dbm", "sensing_noise_w", dbm_to_watt, cfg.sensing_noise);
  }

  if (doc.contains("snapshots")) cfg.snapshots = integer(doc.at("snapshots"), "snapshots");
  if (doc.contains("subspace_tol")) cfg.subspace_tol = number(doc.at("subspace_tol"), "subspace_tol");
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    require_object(s, "solver", {"feasibility_tol", "gap_tol", "max_iterations", "retry_loose"});
    if (s.contains("feasibility_tol")) cfg.solver.feasibility_tol = number(s.at("feasibility_tol"), "solver.feasibility_tol");
    if (s.contains("gap_tol")) cfg.solver.gap_tol = number(s.at("gap_tol"), "solver.gap_tol");
    if (s.contains("max_iterations")) cfg.solver.max_iterations = integer(s.at("max_iterations"), "solver.max_iterations");
    if (s.contains("retry_loose")) {
      if (!s.at("retry_loose").is_boolean()) throw ConfigError("solver.retry_loose: expected a boolean");
      cfg.solver.retry_loose = s.at("retry_loose").get<bool>();
    }
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  cfg.target.phi = geometry::wrap_angle(cfg.target.phi);
  cfg.validate();
  return cfg;
}

ScenarioConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return from_json(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ScenarioConfig& cfg) {
  json users = json::array();
  for (const auto& u : cfg.users) {
    users.push_back({{"range", u.range}, {"angle_rad", u.angle}, {"gain", complex_json(u.gain)}, {"sinr", u.sinr_target}});
  }
  json profile = "unit";
  if (!cfg.profile.empty()) {
    profile = json::array();
    for (cplx z : cfg.profile) profile.push_back(complex_json(z));
  }
  return {
      {"array", {{"num_elements", cfg.num_elements}, {"carrier_freq_hz", cfg.carrier_freq}}},
      {"target",
       {{"x_c", cfg.target.x_c},
        {"y_c", cfg.target.y_c},
        {"phi_rad", cfg.target.phi},
        {"length", cfg.target.length},
        {"width", cfg.target.width},
        {"layout",
         {{"outer", cfg.layout.outer},
          {"inner", cfg.layout.inner},
          {"center", cfg.layout.center},
          {"inner_scale", cfg.layout.inner_scale}}},
        {"profile", profile}}},
      {"users", users},
      {"power", {{"p_max_w", cfg.power_budget}, {"comm_noise_w", cfg.comm_noise}, {"sensing_noise_w", cfg.sensing_noise}}},
      {"snapshots", cfg.snapshots},
      {"subspace_tol", cfg.subspace_tol},
      {"solver",
       {{"feasibility_tol", cfg.solver.feasibility_tol},
        {"gap_tol", cfg.solver.gap_tol},
        {"max_iterations", cfg.solver.max_iterations},
        {"retry_loose", cfg.solver.retry_loose}}},
      {"seed", cfg.seed},
  };
}

std::string scenario_hash(const ScenarioConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.config = cfg;
  sc.hash = scenario_hash(cfg);
  sc.array = geometry::ArrayGeometry::ula(cfg.num_elements, cfg.carrier_freq);
  sc.cloud = geometry::ellipse_cloud(cfg.target, cfg.layout);
  if (!cfg.profile.empty()) sc.cloud.profile = Eigen::Map<const CVec>(cfg.profile.data(), cfg.profile.size());
  for (const auto& u : cfg.users) sc.channels.push_back(geometry::user_channel(sc.array, u));

  design::DesignProblem& pb = sc.problem;
  pb.channels = sc.channels;
  for (const auto& u : cfg.users) pb.sinr_targets.push_back(u.sinr_target);
  pb.comm_noise = cfg.comm_noise;
  pb.sensing = fisher::SensingConfig{cfg.snapshots, cfg.sensing_noise};
  pb.power_budget = cfg.power_budget;
  pb.operators = std::make_shared<fisher::FisherOperators>(fisher::build_operators(sc.cloud, sc.array));
  pb.basis = std::make_shared<subspace::SubspaceBasis>(
      subspace::build_subspace(sc.channels, sc.cloud, sc.array, cfg.subspace_tol));
  return sc;
}

}  // namespace nfet::config
