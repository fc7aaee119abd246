#include "halphen/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "halphen/theta.hpp"
#include "halphen/transforms.hpp"

namespace halphen {

namespace {

using nlohmann::json;

// ---------------- deterministic random helpers ----------------

double urand(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }

Complex disc_rand(std::mt19937_64& g, double radius) {
  const double r = radius * std::sqrt(urand(g));
  const double phi = 2.0 * std::numbers::pi * urand(g);
  return Complex(r * std::cos(phi), r * std::sin(phi));
}

// ---------------- json <-> complex ----------------

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json complex_list_to_json(const std::vector<Complex>& zs) {
  json arr = json::array();
  for (const auto& z : zs) arr.push_back(complex_to_json(z));
  return arr;
}

Complex complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where, "complex values are two-element arrays [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

std::vector<Complex> complex_list_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of [re, im] pairs");
  std::vector<Complex> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(complex_from_json(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------- system descriptors ----------------

struct SystemDesc {
  int dim;
  std::vector<std::string> symbols;
};

const std::map<std::string, SystemDesc>& system_table() {
  static const std::map<std::string, SystemDesc> table = {
      {"hal1", {3, {"X", "Y", "Z"}}},
      {"hal2", {3, {"x1", "x2", "x3"}}},
      {"chazy", {3, {"y", "y1", "y2"}}},
      {"dhv", {5, {"w1", "w2", "w3", "phi", "theta"}}},
      {"ach", {3, {"w1", "w2", "w3"}}},
      {"dh9", {9, {"m11", "m12", "m13", "m21", "m22", "m23", "m31", "m32", "m33"}}},
  };
  return table;
}

const std::map<std::string, std::vector<std::string>>& verification_table() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"hal1", {"closed-form", "transform"}},
      {"hal2", {"lax", "exponents", "closed-form", "transform", "f-integrability", "z-system"}},
      {"chazy", {"closed-form"}},
      {"dhv", {"lax", "transform"}},
      {"ach", {"transform"}},
      {"dh9", {"transform"}},
  };
  return table;
}

bool is_minus_eighth(const HalphenABC& p) {
  return std::abs(p.a + 0.125) < 1e-12 && std::abs(p.b + 0.125) < 1e-12 &&
         std::abs(p.c + 0.125) < 1e-12;
}

}  // namespace

// ---------------- complex literal parsing ----------------

Complex parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw ConfigError("complex", "empty complex literal");

  auto parse_real = [](const std::string& tok, double& out) {
    if (tok.empty()) return false;
    std::size_t pos = 0;
    try {
      out = std::stod(tok, &pos);
    } catch (const std::exception&) {
      return false;
    }
    return pos == tok.size();
  };

  // Split at the last top-level +/- that is not a leading sign or an
  // exponent sign.
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }

  auto parse_imag_token = [&](std::string tok, double& out) {
    if (tok.empty() || tok.back() != 'i') return false;
    tok.pop_back();
    if (tok.empty() || tok == "+") {
      out = 1.0;
      return true;
    }
    if (tok == "-") {
      out = -1.0;
      return true;
    }
    return parse_real(tok, out);
  };

  double re = 0.0, im = 0.0;
  if (s.back() == 'i') {
    if (split == std::string::npos) {
      if (!parse_imag_token(s, im)) throw ConfigError("complex", "bad literal '" + text + "'");
      return Complex(0.0, im);
    }
    if (!parse_real(s.substr(0, split), re) || !parse_imag_token(s.substr(split), im))
      throw ConfigError("complex", "bad literal '" + text + "'");
    return Complex(re, im);
  }
  if (!parse_real(s, re)) throw ConfigError("complex", "bad literal '" + text + "'");
  return Complex(re, 0.0);
}

// ---------------- config parsing ----------------

ScenarioConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  ScenarioConfig cfg;
  cfg.raw = j;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("name", "must be a string");
    cfg.name = j["name"].get<std::string>();
  }

  if (!j.contains("system") || !j["system"].is_string())
    throw ConfigError("system", "required string, one of hal1|hal2|chazy|dhv|ach|dh9");
  cfg.system = j["system"].get<std::string>();
  const auto sys_it = system_table().find(cfg.system);
  if (sys_it == system_table().end())
    throw ConfigError("system", "unknown system '" + cfg.system + "'");

  if (j.contains("parameters")) {
    const json& p = j["parameters"];
    if (!p.is_object()) throw ConfigError("parameters", "must be an object");
    if (p.contains("abc")) {
      const auto v = complex_list_from_json(p["abc"], "parameters.abc");
      if (v.size() != 3) throw ConfigError("parameters.abc", "need exactly three values");
      cfg.abc = HalphenABC{v[0], v[1], v[2]};
    }
    if (p.contains("alphas")) {
      const auto v = complex_list_from_json(p["alphas"], "parameters.alphas");
      if (v.size() != 3) throw ConfigError("parameters.alphas", "need exactly three values");
      cfg.alphas = AlphaParams{v[0], v[1], v[2]};
    }
  }
  if (cfg.system == "hal2" && !cfg.abc) {
    if (cfg.alphas)
      cfg.abc = alphas_to_abc(*cfg.alphas);
    else
      throw ConfigError("parameters.abc", "hal2 requires abc (or alphas)");
  }
  if (cfg.system == "ach" && !cfg.alphas)
    throw ConfigError("parameters.alphas", "ach requires alphas");

  if (!j.contains("path")) throw ConfigError("path", "required list of complex vertices");
  cfg.path = complex_list_from_json(j["path"], "path");
  if (cfg.path.size() < 2) throw ConfigError("path", "need at least two vertices");
  for (std::size_t k = 1; k < cfg.path.size(); ++k)
    if (cfg.path[k] == cfg.path[k - 1])
      throw ConfigError("path", "consecutive vertices must be distinct");

  if (j.contains("z_path")) cfg.z_path = complex_list_from_json(j["z_path"], "z_path");

  if (!j.contains("initial_state"))
    throw ConfigError("initial_state", "required ([ [re,im], ... ] or \"theta:...\")");
  const json& init = j["initial_state"];
  if (init.is_string()) {
    const std::string text = init.get<std::string>();
    if (text.rfind("theta:", 0) != 0)
      throw ConfigError("initial_state", "string form must start with 'theta:'");
    std::vector<std::string> toks;
    std::stringstream ss(text.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.size() != 5)
      throw ConfigError("initial_state", "theta form is theta:ma,mb,mc,md,t0");
    Mobius m;
    m.ma = parse_complex(toks[0]);
    m.mb = parse_complex(toks[1]);
    m.mc = parse_complex(toks[2]);
    m.md = parse_complex(toks[3]);
    try {
      validate_mobius(m);
    } catch (const DomainError& e) {
      throw ConfigError("initial_state", e.what());
    }
    cfg.theta_mobius = m;
    cfg.theta_t0 = parse_complex(toks[4]);
    if (std::abs(*cfg.theta_t0 - cfg.path.front()) > 1e-12)
      throw ConfigError("initial_state", "theta t0 must equal the first path vertex");
    if (cfg.system != "hal1" && cfg.system != "chazy" && cfg.system != "hal2")
      throw ConfigError("initial_state", "theta start available for hal1, chazy and hal2 only");
    if (cfg.system == "hal2" && !is_minus_eighth(*cfg.abc))
      throw ConfigError("initial_state", "theta start for hal2 requires a=b=c=-1/8");
  } else {
    const auto vals = complex_list_from_json(init, "initial_state");
    if (int(vals.size()) != sys_it->second.dim)
      throw ConfigError("initial_state", "expected " + std::to_string(sys_it->second.dim) +
                                             " components for " + cfg.system);
    cfg.initial_values = vals;
  }

  if (j.contains("tolerance")) {
    if (!j["tolerance"].is_number() || !(j["tolerance"].get<double>() > 0.0))
      throw ConfigError("tolerance", "must be a positive number");
    cfg.tolerance = j["tolerance"].get<double>();
  }
  if (j.contains("integration_tolerance")) {
    if (!j["integration_tolerance"].is_number() ||
        !(j["integration_tolerance"].get<double>() > 0.0))
      throw ConfigError("integration_tolerance", "must be a positive number");
    cfg.integration_tolerance = j["integration_tolerance"].get<double>();
  }

  if (!j.contains("verification") || !j["verification"].is_array())
    throw ConfigError("verification", "required list");
  const auto& allowed = verification_table().at(cfg.system);
  for (const auto& v : j["verification"]) {
    if (!v.is_string()) throw ConfigError("verification", "entries must be strings");
    const std::string name = v.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw ConfigError("verification", "'" + name + "' is not valid for system " + cfg.system);
    cfg.verifications.push_back(name);
  }

  if (j.contains("med")) {
    const json& mj = j["med"];
    if (!mj.is_object()) throw ConfigError("med", "must be an object");
    if (mj.contains("mu")) cfg.med.mu = complex_from_json(mj["mu"], "med.mu");
    if (mj.contains("c")) {
      const auto cs = complex_list_from_json(mj["c"], "med.c");
      if (cs.size() != 3) throw ConfigError("med.c", "need exactly three values");
      cfg.med.c1 = cs[0];
      cfg.med.c2 = cs[1];
      cfg.med.c3 = cs[2];
    }
    if (mj.contains("S")) {
      const json& sj = mj["S"];
      if (!sj.is_array() || sj.size() != 2)
        throw ConfigError("med.S", "must be a 2x2 matrix of [re, im] entries");
      for (int r = 0; r < 2; ++r) {
        if (!sj[r].is_array() || sj[r].size() != 2)
          throw ConfigError("med.S", "must be a 2x2 matrix of [re, im] entries");
        for (int ccol = 0; ccol < 2; ++ccol)
          cfg.med.S(r, ccol) = complex_from_json(sj[r][ccol], "med.S");
      }
    }
    try {
      cfg.med.validate();
    } catch (const DomainError& e) {
      const std::string what = e.what();
      if (what.find("c1+c2+c3") != std::string::npos)
        throw ConfigError("med.c", "constraint c1+c2+c3 = 0 violated");
      throw ConfigError("med.S", "constraint trace(S) = 0 violated");
    }
  }

  return cfg;
}

// ---------------- initial state and fields ----------------

namespace {

Vec resolve_initial_state(const ScenarioConfig& cfg) {
  if (cfg.initial_values) {
    Vec v(cfg.initial_values->size());
    for (std::size_t k = 0; k < cfg.initial_values->size(); ++k) v[k] = (*cfg.initial_values)[k];
    return v;
  }
  const Mobius& m = *cfg.theta_mobius;
  const Complex t0 = *cfg.theta_t0;
  if (cfg.system == "hal1") return to_vec(hal1_theta_solution(m, t0));
  if (cfg.system == "chazy") return to_vec(chazy_theta_solution(m, t0));
  return to_vec(hal1_to_hal2_state(hal1_theta_solution(m, t0)));
}

FieldFn make_field(const ScenarioConfig& cfg) {
  if (cfg.system == "hal1") return hal1_field_fn();
  if (cfg.system == "hal2") return hal2_field_fn(*cfg.abc);
  if (cfg.system == "chazy") return chazy_field_fn();
  if (cfg.system == "dhv") return dhv_field_fn();
  if (cfg.system == "ach") return ach_field_fn(*cfg.alphas);
  return dh9_field_fn();
}

std::vector<Complex> circle_grid(double radius, int n, double phase) {
  std::vector<Complex> pts;
  for (int k = 0; k < n; ++k) {
    const double ang = phase + 2.0 * std::numbers::pi * k / n;
    pts.push_back(radius * Complex(std::cos(ang), std::sin(ang)));
  }
  return pts;
}

double max_state_abs(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& smp : traj.samples()) m = std::max(m, smp.y.cwiseAbs().maxCoeff());
  return m;
}

/// x grid for the hal2 pair: a circle of twice the largest |x_j| seen
/// along the trajectory, clear of all poles by construction.
std::vector<Complex> default_hal2_grid(const Trajectory& traj, int n) {
  const double radius = std::max(2.0 * max_state_abs(traj), 1.0);
  return circle_grid(radius, n, 0.1);
}

/// x grid for the DH-V pair: a circle comfortably outside every root of
/// P(x, t) over the probed samples.
std::vector<Complex> default_dhv_grid(const Trajectory& traj, int n) {
  double rmax = 1.0;
  for (const auto& smp : traj.samples()) {
    const DhvLaxParams par = DhvLaxParams::from_state(dhv_from_vec(smp.y));
    const Complex bsum = par.beta_plus + par.beta_minus;
    std::vector<Complex> uroots;
    if (std::abs(par.alpha_plus) > 1e-12) {
      const Complex disc = std::sqrt(bsum * bsum - 4.0 * par.alpha_plus * par.alpha_minus);
      uroots.push_back((-bsum + disc) / (2.0 * par.alpha_plus));
      uroots.push_back((-bsum - disc) / (2.0 * par.alpha_plus));
    } else if (std::abs(bsum) > 1e-12) {
      uroots.push_back(-par.alpha_minus / bsum);
    }
    for (const auto& u : uroots) rmax = std::max(rmax, std::sqrt(std::abs(u)));
  }
  return circle_grid(2.0 * rmax, n, 0.35);
}

// ---------------- verification runners ----------------

VerificationResult verify_lax(const ScenarioConfig& cfg, const Trajectory& traj) {
  VerificationResult res;
  res.name = "lax";
  res.tolerance = cfg.tolerance;
  if (cfg.system == "hal2") {
    ResidualReport rep =
        med_compatibility_residual(traj, cfg.med, *cfg.abc, default_hal2_grid(traj, 5), 5);
    rep.trajectory_id = cfg.name;
    rep.tolerance = cfg.tolerance;
    res.max_residual = rep.max_abs_residual;
    res.reports.push_back(std::move(rep));
  } else {
    ResidualReport rep = dhv_compatibility_residual(traj, cfg.med.mu, default_dhv_grid(traj, 4), 4);
    rep.trajectory_id = cfg.name;
    rep.tolerance = cfg.tolerance;
    res.max_residual = rep.max_abs_residual;
    res.reports.push_back(std::move(rep));
  }
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

VerificationResult verify_z_system(const ScenarioConfig& cfg, const Trajectory& traj) {
  VerificationResult res;
  res.name = "z-system";
  res.tolerance = cfg.tolerance;
  ResidualReport rep = z_system_residual(traj, cfg.med, *cfg.abc, default_hal2_grid(traj, 5), 5);
  rep.trajectory_id = cfg.name;
  rep.tolerance = cfg.tolerance;
  res.max_residual = rep.max_abs_residual;
  res.reports.push_back(std::move(rep));
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

VerificationResult verify_exponents(const ScenarioConfig& cfg, const Trajectory& traj) {
  VerificationResult res;
  res.name = "exponents";
  res.tolerance = cfg.tolerance;
  int sign = 0;
  bool consistent = true;
  for (int site = 1; site <= 3; ++site) {
    const ExponentEvolutionReport rep = exponent_evolution_check(traj, cfg.med, site);
    res.max_residual = std::max(res.max_residual, rep.matched_error);
    res.max_residual = std::max(res.max_residual, rep.matrix_part_drift);
    if (sign == 0) sign = rep.matched_sign;
    consistent = consistent && (rep.matched_sign == sign);
  }
  res.note = std::string("matched sign ") + (sign > 0 ? "+1" : "-1") +
             (consistent ? ", consistent across sites" : ", INCONSISTENT across sites");
  res.pass = consistent && res.max_residual <= res.tolerance;
  return res;
}

VerificationResult verify_closed_form(const ScenarioConfig& cfg, const Trajectory& traj) {
  VerificationResult res;
  res.name = "closed-form";
  res.tolerance = cfg.tolerance;

  if (cfg.system == "hal2" && cfg.z_path) {
    const ParametricHal2Solution sol =
        hal2_hypergeom_solution(*cfg.abc, PathSpec(*cfg.z_path), {}, cfg.integration_tolerance);
    res.max_residual = hal2_parametrization_residual(sol);
    res.note = "ratio-of-solutions parametrization residual along z_path";
    res.pass = res.max_residual <= res.tolerance;
    return res;
  }

  if (!cfg.theta_mobius)
    throw ConfigError("verification", "closed-form needs a theta initial state (or z_path)");
  const Mobius& m = *cfg.theta_mobius;
  const double L = traj.total_length();
  for (int k = 0; k < 10; ++k) {
    const double s = L * double(k) / 9.0;
    const Complex t = traj.time_at(s);
    Vec closed;
    if (cfg.system == "hal1")
      closed = to_vec(hal1_theta_solution(m, t));
    else if (cfg.system == "chazy")
      closed = to_vec(chazy_theta_solution(m, t));
    else
      closed = to_vec(hal1_to_hal2_state(hal1_theta_solution(m, t)));
    const Vec have = traj.state_at(s);
    res.max_residual = std::max(res.max_residual, (have - closed).cwiseAbs().maxCoeff());
  }
  res.note = "integrated trajectory vs theta closed form at 10 path points";
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

VerificationResult verify_transform(const ScenarioConfig& cfg, const Trajectory& traj) {
  VerificationResult res;
  res.name = "transform";
  res.tolerance = cfg.tolerance;

  if (cfg.system == "hal1") {
    // Mapped (y, y', y'') must satisfy the third-order scalar equation;
    // only the top derivative needs a finite difference.
    const double L = traj.total_length();
    const double h = std::min(0.01 * L, 0.006);
    for (int k = 0; k < 5; ++k) {
      const double s0 =
          traj.path().clamp_to_segment_interior(L * (0.15 + 0.7 * k / 4.0), 2.0 * h);
      const Complex dir = (traj.time_at(s0 + 0.5 * h) - traj.time_at(s0 - 0.5 * h)) / Complex(h);
      const Complex dy2_ds = fd_derivative(
          [&](const Complex& sc) {
            return hal1_to_chazy(hal1_from_vec(traj.state_at(sc.real()))).y2;
          },
          Complex(s0), h);
      const ChazyState c = hal1_to_chazy(hal1_from_vec(traj.state_at(s0)));
      const Complex y3 = dy2_ds / dir;
      res.max_residual =
          std::max(res.max_residual, std::abs(y3 - (2.0 * c.y * c.y2 - 3.0 * c.y1 * c.y1)));
    }
    res.note = "hal1 -> chazy map, third-derivative residual by finite differences";
  } else if (cfg.system == "hal2") {
    if (!is_minus_eighth(*cfg.abc))
      throw ConfigError("verification", "hal2 transform check requires a=b=c=-1/8");
    for (const auto& smp : traj.samples()) {
      const Hal1State mapped = hal2_to_hal1_state(hal2_from_vec(smp.y));
      const Hal1State mapped_rate = hal2_to_hal1_state(hal2_from_vec(smp.dydt));
      const Vec diff = to_vec(mapped_rate) - to_vec(hal1_field(mapped));
      res.max_residual = std::max(res.max_residual, diff.cwiseAbs().maxCoeff());
    }
    res.note = "hal2(-1/8) trajectory mapped to hal1: derivative vs field";
  } else if (cfg.system == "ach") {
    const HalphenABC abc = alphas_to_abc(*cfg.alphas);
    for (const auto& smp : traj.samples()) {
      const Hal2State mapped = ach_state_to_hal2_state(ach_from_vec(smp.y));
      const Hal2State mapped_rate = ach_state_to_hal2_state(ach_from_vec(smp.dydt));
      const Vec diff = to_vec(mapped_rate) - to_vec(hal2_field(mapped, abc));
      res.max_residual = std::max(res.max_residual, diff.cwiseAbs().maxCoeff());
    }
    res.note = "ach trajectory mapped to hal2: derivative vs field under the parameter map";
  } else if (cfg.system == "dhv") {
    for (const auto& smp : traj.samples()) {
      const Mat3 lhs = dh9_field(embed_block_dh9(dhv_from_vec(smp.y))).m;
      const Mat3 rhs = embed_block_dh9(dhv_from_vec(smp.dydt)).m;
      res.max_residual = std::max(res.max_residual, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    res.note = "block embedding intertwines the matrix flow and the fifth-order field";
  } else if (cfg.system == "dh9") {
    for (const auto& smp : traj.samples()) {
      const Mat3State st = mat3_from_vec(smp.y);
      const double scale = 1.0 + st.m.cwiseAbs().maxCoeff();
      const bool block = std::abs(st.m(0, 2)) + std::abs(st.m(1, 2)) + std::abs(st.m(2, 0)) +
                             std::abs(st.m(2, 1)) <
                         1e-12 * scale;
      if (!block) {
        res.note = "state is not block-shaped; no reduction applies";
        res.max_residual = std::numeric_limits<double>::infinity();
        break;
      }
      const DhvState red{st.m(0, 0), st.m(1, 1), st.m(2, 2), st.m(1, 0), st.m(0, 1)};
      const Mat3 diff = dh9_field(st).m - embed_block_dh9(dhv_field(red)).m;
      res.max_residual = std::max(res.max_residual, diff.cwiseAbs().maxCoeff());
    }
    if (res.note.empty()) res.note = "block reduction of the matrix flow matches the fifth-order field";
  } else {
    throw ConfigError("verification", "transform is not available for " + cfg.system);
  }
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

VerificationResult verify_f_integrability(const ScenarioConfig& cfg, const Trajectory& traj) {
  VerificationResult res;
  res.name = "f-integrability";
  res.tolerance = cfg.tolerance;
  std::mt19937_64 rng(0x6a1f5u);
  const double L = traj.total_length();
  for (int k = 0; k < 5; ++k) {
    const Hal2State st = hal2_from_vec(traj.state_at(L * k / 4.0));
    const double scale =
        1.0 + std::max({std::abs(st.x1), std::abs(st.x2), std::abs(st.x3)});
    for (int q = 0; q < 5; ++q) {
      const Complex x = disc_rand(rng, 2.0 * scale);
      res.max_residual =
          std::max(res.max_residual, std::abs(f_integrability_residual(st, *cfg.abc, x)));
    }
  }
  res.note = "polynomial identity at trajectory states and random x";
  res.pass = res.max_residual <= res.tolerance;
  return res;
}

}  // namespace

// ---------------- scenario execution ----------------

RunOutcome run_scenario(const ScenarioConfig& cfg) {
  RunOutcome out;
  out.name = cfg.name;
  out.system = cfg.system;
  out.config_echo = cfg.raw;

  const Vec y0 = resolve_initial_state(cfg);
  const PathSpec path(cfg.path);
  const FieldFn field = make_field(cfg);

  std::optional<Trajectory> traj;
  TrajectorySummary summary;
  try {
    traj = integrate_path(field, y0, path, cfg.integration_tolerance);
  } catch (const BlowUpError& e) {
    traj = e.partial();
    summary.blow_up = true;
  }
  summary.steps = traj->accepted_steps();
  summary.rejected_steps = traj->rejected_steps();
  summary.end_time = traj->samples().back().t;
  for (Eigen::Index i = 0; i < traj->samples().back().y.size(); ++i)
    summary.end_state.push_back(traj->samples().back().y[i]);
  out.trajectory_summary = summary;

  if (summary.blow_up) {
    out.pass = false;
  } else {
    for (const std::string& v : cfg.verifications) {
      VerificationResult res;
      if (v == "lax")
        res = verify_lax(cfg, *traj);
      else if (v == "z-system")
        res = verify_z_system(cfg, *traj);
      else if (v == "exponents")
        res = verify_exponents(cfg, *traj);
      else if (v == "closed-form")
        res = verify_closed_form(cfg, *traj);
      else if (v == "transform")
        res = verify_transform(cfg, *traj);
      else
        res = verify_f_integrability(cfg, *traj);
      out.pass = out.pass && res.pass;
      out.verifications.push_back(std::move(res));
    }
  }
  out.trajectory = std::move(traj);
  return out;
}

// ---------------- report output ----------------

nlohmann::json to_json(const ResidualReport& rep) {
  json j;
  j["kind"] = rep.kind;
  j["x_grid"] = complex_list_to_json(rep.x_grid);
  j["t_points"] = complex_list_to_json(rep.t_points);
  j["max_abs_residual"] = rep.max_abs_residual;
  j["scalar_part_max"] = rep.scalar_part_max;
  j["traceless_part_max"] = rep.traceless_part_max;
  j["commutator_max"] = rep.commutator_max;
  j["metadata"] = {{"trajectory_id", rep.trajectory_id}, {"tolerance", rep.tolerance}};
  return j;
}

nlohmann::json report_to_json(const RunOutcome& outcome) {
  json j;
  j["name"] = outcome.name;
  j["config"] = outcome.config_echo;
  if (outcome.trajectory_summary) {
    const auto& s = *outcome.trajectory_summary;
    j["trajectory"] = {{"steps", s.steps},
                       {"rejected_steps", s.rejected_steps},
                       {"end_time", complex_to_json(s.end_time)},
                       {"end_state", complex_list_to_json(s.end_state)},
                       {"blow_up", s.blow_up}};
  }
  json vlist = json::array();
  for (const auto& v : outcome.verifications) {
    json vj;
    vj["name"] = v.name;
    vj["max_residual"] = v.max_residual;
    vj["tolerance"] = v.tolerance;
    vj["pass"] = v.pass;
    if (!v.note.empty()) vj["note"] = v.note;
    if (!v.reports.empty()) {
      json reps = json::array();
      for (const auto& r : v.reports) reps.push_back(to_json(r));
      vj["reports"] = reps;
    }
    vlist.push_back(vj);
  }
  j["verifications"] = vlist;
  j["pass"] = outcome.pass;
  return j;
}

void write_trajectory_csv(std::ostream& out, const std::string& system, const Trajectory& traj) {
  const auto it = system_table().find(system);
  if (it == system_table().end()) throw ConfigError("system", "unknown system '" + system + "'");
  out << "path_param,t_re,t_im";
  for (const auto& sym : it->second.symbols) out << ',' << sym << "_re," << sym << "_im";
  out << '\n';
  for (const auto& smp : traj.samples()) {
    out << fmt_double(smp.s) << ',' << fmt_double(smp.t.real()) << ',' << fmt_double(smp.t.imag());
    for (Eigen::Index i = 0; i < smp.y.size(); ++i)
      out << ',' << fmt_double(smp.y[i].real()) << ',' << fmt_double(smp.y[i].imag());
    out << '\n';
  }
}

// ---------------- built-in scenarios ----------------

namespace {

RunOutcome make_direct_outcome(const std::string& name, json echo) {
  RunOutcome out;
  out.name = name;
  out.config_echo = std::move(echo);
  return out;
}

void push_result(RunOutcome& out, VerificationResult res) {
  out.pass = out.pass && res.pass;
  out.verifications.push_back(std::move(res));
}

std::vector<Complex> theta_tau_grid() {
  std::vector<Complex> taus;
  for (int k = 0; k < 10; ++k)
    taus.push_back(Complex(-0.45 + 0.1 * k, 0.8 + 2.2 * k / 9.0));
  return taus;
}

std::vector<Complex> theta_t_grid() {
  std::vector<Complex> ts;
  for (int k = 0; k < 10; ++k)
    ts.push_back(Complex(-0.35 + 0.08 * k, 0.9 + 0.12 * k));
  return ts;
}

RunOutcome run_theta_identities() {
  RunOutcome out = make_direct_outcome("theta-identities", {{"name", "theta-identities"}});
  VerificationResult res;
  res.name = "theta-identities";
  res.tolerance = 1e-12;
  for (const Complex& tau : theta_tau_grid()) {
    const ThetaArg arg{tau};
    const Complex t2 = theta_const(2, arg), t3 = theta_const(3, arg), t4 = theta_const(4, arg);
    const Complex t1p = theta1_prime(arg).value;
    const double rel1 = std::abs(t1p - t2 * t3 * t4) / std::abs(t1p);
    const Complex q2 = t2 * t2 * t2 * t2, q3 = t3 * t3 * t3 * t3, q4 = t4 * t4 * t4 * t4;
    const double rel2 = std::abs(q2 + q4 - q3) / std::abs(q3);
    res.max_residual = std::max({res.max_residual, rel1, rel2});
  }
  res.note = "theta1' = theta2 theta3 theta4 and the quartic identity on 10 tau points";
  res.pass = res.max_residual <= res.tolerance;
  push_result(out, res);
  return out;
}

double hal1_solution_residual(const Mobius& m, const std::vector<Complex>& ts) {
  double worst = 0.0;
  for (const Complex& t : ts) {
    const Vec fd = fd_derivative(
        [&](const Complex& z) { return to_vec(hal1_theta_solution(m, z)); }, t);
    const Vec field = to_vec(hal1_field(hal1_theta_solution(m, t)));
    worst = std::max(worst, (fd - field).cwiseAbs().maxCoeff());
  }
  return worst;
}

RunOutcome run_hal1_closed_form() {
  RunOutcome out = make_direct_outcome("hal1-closed-form", {{"name", "hal1-closed-form"}});
  const std::vector<Complex> ts = theta_t_grid();
  VerificationResult res;
  res.name = "closed-form";
  res.tolerance = 1e-7;
  res.max_residual = hal1_solution_residual(Mobius{}, ts);
  const Mobius inv{Complex(0.0), Complex(-1.0), Complex(1.0), Complex(0.0)};  // t -> -1/t
  res.max_residual = std::max(res.max_residual, hal1_solution_residual(inv, ts));
  res.note = "finite-difference t-derivative vs field, identity and inversion Moebius";
  res.pass = res.max_residual <= res.tolerance;
  push_result(out, res);
  return out;
}

RunOutcome run_chazy_closed_form() {
  RunOutcome out = make_direct_outcome("chazy-closed-form", {{"name", "chazy-closed-form"}});
  const std::vector<Complex> ts = theta_t_grid();
  const Mobius id{};

  VerificationResult res;
  res.name = "closed-form";
  res.tolerance = 1e-7;
  for (const Complex& t : ts) {
    const Complex y3 = fd_derivative(
        [&](const Complex& z) { return chazy_theta_solution(id, z).y2; }, t);
    const ChazyState c = chazy_theta_solution(id, t);
    res.max_residual =
        std::max(res.max_residual, std::abs(y3 - (2.0 * c.y * c.y2 - 3.0 * c.y1 * c.y1)));
  }
  res.note = "y''' residual of the theta closed form by finite differences";
  res.pass = res.max_residual <= res.tolerance;
  push_result(out, res);

  VerificationResult cons;
  cons.name = "hal1-consistency";
  cons.tolerance = 1e-10;
  for (const Complex& t : ts) {
    const Hal1State h = hal1_theta_solution(id, t);
    const Complex y = chazy_theta_solution(id, t).y;
    cons.max_residual = std::max(
        cons.max_residual, std::abs(y - 2.0 * (h.X + h.Y + h.Z)) / (1.0 + std::abs(y)));
  }
  cons.note = "y = 2(X+Y+Z) against the hal1 closed form";
  cons.pass = cons.max_residual <= cons.tolerance;
  push_result(out, cons);
  return out;
}

json minus_eighth_abc_json() {
  return {{"abc", json::array({json::array({-0.125, 0.0}), json::array({-0.125, 0.0}),
                               json::array({-0.125, 0.0})})}};
}

RunOutcome run_hal2_to_hal1() {
  json cfg;
  cfg["name"] = "hal2-to-hal1-transform";
  cfg["system"] = "hal2";
  cfg["parameters"] = minus_eighth_abc_json();
  cfg["initial_state"] = "theta:1,0,0,1,i";
  cfg["path"] = json::array({json::array({0.0, 1.0}), json::array({0.5, 1.0})});
  cfg["tolerance"] = 1e-8;
  cfg["verification"] = json::array({"transform"});
  return run_scenario(parse_config_json(cfg));
}

RunOutcome run_hal2_lax_default() {
  json cfg;
  cfg["name"] = "hal2-lax-default";
  cfg["system"] = "hal2";
  cfg["parameters"] = minus_eighth_abc_json();
  cfg["initial_state"] = "theta:1,0,0,1,i";
  cfg["path"] = json::array({json::array({0.0, 1.0}), json::array({0.5, 1.0})});
  cfg["tolerance"] = 1e-8;
  cfg["verification"] = json::array({"lax", "z-system"});
  RunOutcome out = run_scenario(parse_config_json(cfg));

  // Sensitivity control: a uniformly perturbed field must be detected.
  const HalphenABC abc{-0.125, -0.125, -0.125};
  FieldFn pert = [abc](const Complex&, const Vec& v) {
    Vec f = to_vec(hal2_field(hal2_from_vec(v), abc));
    f.array() += Complex(0.01, 0.0);
    return f;
  };
  const Vec y0 = to_vec(hal1_to_hal2_state(hal1_theta_solution(Mobius{}, Complex(0.0, 1.0))));
  const Trajectory traj =
      integrate_path(pert, y0, PathSpec(Complex(0.0, 1.0), Complex(0.5, 1.0)), 1e-12);
  const ResidualReport rep =
      med_compatibility_residual(traj, MedParams{}, abc, default_hal2_grid(traj, 5), 5);
  VerificationResult det;
  det.name = "lax-detection";
  det.tolerance = 1e-4;
  det.max_residual = rep.max_abs_residual;
  det.pass = rep.max_abs_residual > 1e-4;
  det.note = "sensitivity control: residual of a perturbed field must exceed 1e-4";
  det.reports.push_back(rep);
  push_result(out, det);
  return out;
}

RunOutcome run_exponent_evolution() {
  RunOutcome out =
      make_direct_outcome("hal2-exponent-evolution", {{"name", "hal2-exponent-evolution"}});
  const HalphenABC abc{-0.125, -0.125, -0.125};
  const std::vector<Complex> starts = {Complex(0.0, 1.0), Complex(0.0, 1.2), Complex(0.2, 0.9)};

  VerificationResult res;
  res.name = "exponents";
  res.tolerance = 1e-7;
  int sign = 0;
  bool consistent = true;
  for (const Complex& t0 : starts) {
    const Vec y0 = to_vec(hal1_to_hal2_state(hal1_theta_solution(Mobius{}, t0)));
    const Trajectory traj =
        integrate_path(hal2_field_fn(abc), y0, PathSpec(t0, t0 + Complex(0.5, 0.0)), 1e-12);
    for (int site = 1; site <= 3; ++site) {
      const ExponentEvolutionReport rep = exponent_evolution_check(traj, MedParams{}, site);
      res.max_residual = std::max(res.max_residual, rep.matched_error);
      res.max_residual = std::max(res.max_residual, rep.matrix_part_drift);
      if (sign == 0) sign = rep.matched_sign;
      consistent = consistent && rep.matched_sign == sign;
    }
  }
  res.note = std::string("matched sign ") + (sign > 0 ? "+1" : "-1") +
             (consistent ? ", consistent across 3 trajectories" : ", INCONSISTENT");
  res.pass = consistent && res.max_residual <= res.tolerance;
  push_result(out, res);
  return out;
}

RunOutcome run_f_integrability() {
  RunOutcome out = make_direct_outcome("f-integrability", {{"name", "f-integrability"}});
  VerificationResult res;
  res.name = "f-integrability";
  res.tolerance = 1e-13;
  std::mt19937_64 rng(0x9e3779b9u);
  for (int k = 0; k < 100; ++k) {
    const Hal2State st{disc_rand(rng, 0.8), disc_rand(rng, 0.8), disc_rand(rng, 0.8)};
    const HalphenABC abc{disc_rand(rng, 0.3), disc_rand(rng, 0.3), disc_rand(rng, 0.3)};
    const Complex x = disc_rand(rng, 2.0);
    res.max_residual = std::max(res.max_residual, std::abs(f_integrability_residual(st, abc, x)));
  }
  res.note = "identity at 100 random (state, parameter, x) samples";
  res.pass = res.max_residual <= res.tolerance;
  push_result(out, res);
  return out;
}

RunOutcome run_dhv_lax_default() {
  json cfg;
  cfg["name"] = "dhv-lax-default";
  cfg["system"] = "dhv";
  cfg["initial_state"] =
      json::array({json::array({0.3, 0.1}), json::array({0.7, -0.2}), json::array({-0.4, 0.15}),
                   json::array({0.25, 0.1}), json::array({-0.35, 0.05})});
  cfg["path"] = json::array({json::array({0.0, 0.0}), json::array({0.25, 0.1})});
  cfg["tolerance"] = 1e-7;
  cfg["verification"] = json::array({"lax", "transform"});
  return run_scenario(parse_config_json(cfg));
}

RunOutcome run_dh9_reductions() {
  RunOutcome out = make_direct_outcome("dh9-reductions", {{"name", "dh9-reductions"}});
  std::mt19937_64 rng(0x51d2c3u);

  VerificationResult diag;
  diag.name = "diagonal-reduction";
  diag.tolerance = 1e-13;
  for (int k = 0; k < 10; ++k) {
    const Complex w1 = disc_rand(rng, 1.0), w2 = disc_rand(rng, 1.0), w3 = disc_rand(rng, 1.0);
    const Mat3 f = dh9_field(embed_diag_dh9(w1, w2, w3)).m;
    const AchState dh = ach_field(AchState{w1, w2, w3}, AlphaParams{0.0, 0.0, 0.0});
    Mat3 expect = Mat3::Zero();
    expect(0, 0) = dh.w1;
    expect(1, 1) = dh.w2;
    expect(2, 2) = dh.w3;
    diag.max_residual = std::max(diag.max_residual, (f - expect).cwiseAbs().maxCoeff());
  }
  diag.note = "matrix flow on diagonal states equals the classical third-order field";
  diag.pass = diag.max_residual <= diag.tolerance;
  push_result(out, diag);

  VerificationResult block;
  block.name = "block-reduction";
  block.tolerance = 1e-13;
  double shape = 0.0;
  for (int k = 0; k < 10; ++k) {
    const DhvState s{disc_rand(rng, 1.0), disc_rand(rng, 1.0), disc_rand(rng, 1.0),
                     disc_rand(rng, 1.0), disc_rand(rng, 1.0)};
    const Mat3 f = dh9_field(embed_block_dh9(s)).m;
    const Mat3 expect = embed_block_dh9(dhv_field(s)).m;
    block.max_residual = std::max(block.max_residual, (f - expect).cwiseAbs().maxCoeff());
    shape = std::max({shape, std::abs(f(0, 2)), std::abs(f(1, 2)), std::abs(f(2, 0)),
                      std::abs(f(2, 1))});
  }
  block.note = "matrix flow on block states equals the fifth-order field; offblock drift " +
               fmt_double(shape);
  block.pass = block.max_residual <= block.tolerance && shape <= 1e-14;
  push_result(out, block);
  return out;
}

RunOutcome run_ach_hal2_equivalence() {
  RunOutcome out =
      make_direct_outcome("ach-hal2-equivalence", {{"name", "ach-hal2-equivalence"}});
  std::mt19937_64 rng(0x2c9277u);

  VerificationResult conj;
  conj.name = "conjugation";
  conj.tolerance = 1e-13;
  for (int k = 0; k < 100; ++k) {
    const AchState w{disc_rand(rng, 0.8), disc_rand(rng, 0.8), disc_rand(rng, 0.8)};
    const AlphaParams al{disc_rand(rng, 0.8), disc_rand(rng, 0.8), disc_rand(rng, 0.8)};
    const Vec lhs = to_vec(ach_state_to_hal2_state(ach_field(w, al)));
    const Vec rhs = to_vec(hal2_field(ach_state_to_hal2_state(w), alphas_to_abc(al)));
    conj.max_residual = std::max(conj.max_residual, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  conj.note = "field conjugation under the state and parameter maps, 100 random points";
  conj.pass = conj.max_residual <= conj.tolerance;
  push_result(out, conj);

  VerificationResult triple;
  triple.name = "parameter-triple";
  triple.tolerance = 1e-13;
  const HalphenABC chazy_abc{-31.0 / 288.0, -23.0 / 288.0, -41.0 / 288.0};
  const AlphaParams al = abc_to_alphas(chazy_abc);
  triple.max_residual = std::max({std::abs(al.alpha1 - 0.0), std::abs(al.alpha2 - 0.5),
                                  std::abs(al.alpha3 - 1.0 / 3.0)});
  const HalphenABC back = alphas_to_abc(al);
  triple.max_residual =
      std::max({triple.max_residual, std::abs(back.a - chazy_abc.a),
                std::abs(back.b - chazy_abc.b), std::abs(back.c - chazy_abc.c)});
  triple.note = "abc_to_alphas on the third-order parameter triple gives (0, 1/2, 1/3)";
  triple.pass = triple.max_residual <= triple.tolerance;
  push_result(out, triple);
  return out;
}

RunOutcome run_hal2_hypergeom() {
  RunOutcome out = make_direct_outcome("hal2-hypergeom", {{"name", "hal2-hypergeom"}});
  const PathSpec zpath(Complex(0.5, 0.0), Complex(0.5, 0.45));
  const std::vector<std::pair<std::string, HalphenABC>> cases = {
      {"a=b=c=-1/8", HalphenABC{-0.125, -0.125, -0.125}},
      {"chazy triple", HalphenABC{-31.0 / 288.0, -23.0 / 288.0, -41.0 / 288.0}},
  };
  for (const auto& [label, abc] : cases) {
    VerificationResult res;
    res.name = "closed-form (" + label + ")";
    res.tolerance = 1e-6;
    const ParametricHal2Solution sol = hal2_hypergeom_solution(abc, zpath);
    res.max_residual = hal2_parametrization_residual(sol);
    res.note = "ratio-of-solutions parametrization residual along the z-path";
    res.pass = res.max_residual <= res.tolerance;
    push_result(out, res);
  }
  return out;
}

RunOutcome run_med_deformation_log() {
  RunOutcome out =
      make_direct_outcome("med-deformation-log", {{"name", "med-deformation-log"}});
  std::mt19937_64 rng(0x77aa11u);

  VerificationResult schles;
  schles.name = "schlesinger-limit";
  schles.tolerance = 0.0;
  {
    std::vector<Eigen::MatrixXcd> residues;
    std::vector<Complex> positions = {Complex(0.0), Complex(1.0), Complex(0.3, 0.7)};
    for (int k = 0; k < 3; ++k) {
      Eigen::MatrixXcd a(2, 2);
      a << disc_rand(rng, 1.0), disc_rand(rng, 1.0), disc_rand(rng, 1.0), disc_rand(rng, 1.0);
      residues.push_back(a);
    }
    const std::vector<Complex> zero_f(3, Complex(0.0));
    const Complex x(2.0, 0.5);
    for (int k = 0; k < 3; ++k) {
      const Eigen::MatrixXcd gen = med_deformation_generator(residues, positions, zero_f, k, x);
      const Eigen::MatrixXcd want = -residues[k] / (x - positions[k]);
      schles.max_residual = std::max(schles.max_residual, (gen - want).cwiseAbs().maxCoeff());
    }
  }
  schles.note = "all f_jk = 0 reduces the generator to -A_k/(x-x_k) exactly";
  schles.pass = schles.max_residual <= schles.tolerance;
  push_result(out, schles);

  VerificationResult sums;
  sums.name = "log-coefficient-sum";
  sums.tolerance = 1e-13;
  int produced = 0;
  while (produced < 100) {
    const Hal2State st{disc_rand(rng, 1.0), disc_rand(rng, 1.0), disc_rand(rng, 1.0)};
    const double sep = std::min({std::abs(st.x1 - st.x2), std::abs(st.x2 - st.x3),
                                 std::abs(st.x3 - st.x1)});
    if (sep < 0.3) continue;  // keep the partial fractions well conditioned
    ++produced;
    const auto f = med_log_coefficients(st, Complex(1.0, 0.5));
    sums.max_residual = std::max(sums.max_residual, std::abs(f[0] + f[1] + f[2]));
  }
  sums.note = "sum of the log-term coefficients vanishes over 100 random states";
  sums.pass = sums.max_residual <= sums.tolerance;
  push_result(out, sums);
  return out;
}

struct BuiltinEntry {
  BuiltinInfo info;
  RunOutcome (*runner)();
};

const std::vector<BuiltinEntry>& builtin_table() {
  static const std::vector<BuiltinEntry> table = {
      {{"theta-identities", "theta1' = theta2 theta3 theta4 and the quartic identity"},
       run_theta_identities},
      {{"hal1-closed-form", "theta closed form of the pairwise-sum system vs its field"},
       run_hal1_closed_form},
      {{"chazy-closed-form", "theta closed form of the third-order equation"},
       run_chazy_closed_form},
      {{"hal2-to-hal1-transform", "hal2(-1/8) trajectory mapped onto the pairwise-sum system"},
       run_hal2_to_hal1},
      {{"hal2-lax-default", "zero-curvature residual of the evolving pair along a hal2 flow"},
       run_hal2_lax_default},
      {{"hal2-exponent-evolution", "local exponent drift law vs finite differences"},
       run_exponent_evolution},
      {{"f-integrability", "scalar rescaling integrability identity at random samples"},
       run_f_integrability},
      {{"dhv-lax-default", "zero-curvature residual of the fifth-order system's pair"},
       run_dhv_lax_default},
      {{"dh9-reductions", "diagonal and block reductions of the ninth-order matrix flow"},
       run_dh9_reductions},
      {{"ach-hal2-equivalence", "third-order reduction vs hal2 under the parameter map"},
       run_ach_hal2_equivalence},
      {{"hal2-hypergeom", "ratio-of-solutions parametrization of hal2 on a z-path"},
       run_hal2_hypergeom},
      {{"med-deformation-log", "deformation generator limit and log-coefficient sums"},
       run_med_deformation_log},
  };
  return table;
}

}  // namespace

const std::vector<BuiltinInfo>& list_scenarios() {
  static const std::vector<BuiltinInfo> infos = [] {
    std::vector<BuiltinInfo> v;
    for (const auto& e : builtin_table()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

bool has_builtin(const std::string& name) {
  for (const auto& e : builtin_table())
    if (e.info.name == name) return true;
  return false;
}

RunOutcome run_builtin(const std::string& name) {
  for (const auto& e : builtin_table())
    if (e.info.name == name) return e.runner();
  throw ConfigError("scenario", "unknown built-in scenario '" + name + "'");
}

}  // namespace halphen
