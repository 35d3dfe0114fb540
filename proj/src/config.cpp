#include "sff/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace sff {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"scenario", {"name", "tf", "dt", "settle_threshold_pct"}},
    {"chief", {"a", "e", "i", "arg_perigee", "raan", "nu0"}},
    {"truth_chief", {"a", "e", "i", "arg_perigee", "raan", "nu0"}},
    {"gravity", {"mu", "Re", "J2", "j2"}},
    {"initial", {"rho", "theta", "a", "b", "m", "n"}},
    {"desired", {"rho", "theta", "a", "b", "m", "n"}},
    {"controller", {"kind", "Q", "R", "guess"}},
    {"sdre", {"sdc", "series_order", "ki_scale", "j2_feedforward", "Q_finite", "scheme"}},
    {"mpsp", {"R", "tol_rho_pct", "max_iter"}},
    {"gmpsp", {"R", "tol_rho_pct", "max_iter"}},
    {"nnlqr", {"enabled", "costate_net", "R1", "beta", "gamma", "theta_scale", "k_tau", "trig_terms"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Best-effort line number of section.key in the raw text, 0 when not found.
int line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream is(text);
  std::string line, current;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, const std::string& text, const std::string& origin)
      : tree_(tree), text_(text), origin_(origin) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    std::ostringstream os;
    os << origin_;
    if (const int n = line_of(text_, section, key)) os << ":" << n;
    os << ": " << section << "." << key << ": " << what;
    throw ConfigError(os.str());
  }

  const pt::ptree* section(const std::string& name) const {
    auto it = tree_.find(name);
    return it == tree_.not_found() ? nullptr : &it->second;
  }

  std::optional<std::string> raw(const std::string& sec, const std::string& key) const {
    const pt::ptree* s = section(sec);
    if (!s) return std::nullopt;
    auto it = s->find(key);
    if (it == s->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  double number(const std::string& sec, const std::string& key, const std::string& v) const {
    const char* b = v.c_str();
    char* end = nullptr;
    const double d = std::strtod(b, &end);
    if (end == b || trim(end) != "" || !std::isfinite(d)) fail(sec, key, "expected a number, got '" + v + "'");
    return d;
  }

  void real(const std::string& sec, const std::string& key, double& out) const {
    if (auto v = raw(sec, key)) out = number(sec, key, *v);
  }

  void integer(const std::string& sec, const std::string& key, int& out) const {
    if (auto v = raw(sec, key)) {
      const double d = number(sec, key, *v);
      if (d != std::floor(d) || std::abs(d) > 1e9) fail(sec, key, "expected an integer, got '" + *v + "'");
      out = static_cast<int>(d);
    }
  }

  // Angles need an explicit "deg" or "rad" suffix.
  void angle(const std::string& sec, const std::string& key, double& out) const {
    auto v = raw(sec, key);
    if (!v) return;
    const auto sp = v->find_last_of(" \t");
    const std::string unit = sp == std::string::npos ? "" : v->substr(sp + 1);
    const std::string num = sp == std::string::npos ? *v : trim(v->substr(0, sp));
    if (unit == "deg")
      out = number(sec, key, num) * M_PI / 180.0;
    else if (unit == "rad")
      out = number(sec, key, num);
    else
      fail(sec, key, "angle needs a 'deg' or 'rad' suffix, got '" + *v + "'");
  }

  void boolean(const std::string& sec, const std::string& key, bool& out) const {
    auto v = raw(sec, key);
    if (!v) return;
    if (*v == "on" || *v == "true" || *v == "1")
      out = true;
    else if (*v == "off" || *v == "false" || *v == "0")
      out = false;
    else
      fail(sec, key, "expected on/off, got '" + *v + "'");
  }

  std::vector<double> list(const std::string& sec, const std::string& key, const std::string& v) const {
    std::istringstream is(v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(number(sec, key, tok));
    return out;
  }

  // 1 value for a multiple of I, n values for a diagonal, n*n for a full row-major matrix.
  template <int N>
  void matrix(const std::string& sec, const std::string& key, Eigen::Matrix<double, N, N>& out) const {
    auto v = raw(sec, key);
    if (!v) return;
    const std::vector<double> d = list(sec, key, *v);
    if (d.size() == 1) {
      out = Eigen::Matrix<double, N, N>::Identity() * d[0];
    } else if (d.size() == static_cast<std::size_t>(N)) {
      out.setZero();
      for (int i = 0; i < N; ++i) out(i, i) = d[i];
    } else if (d.size() == static_cast<std::size_t>(N * N)) {
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(i, j) = d[i * N + j];
    } else {
      fail(sec, key, "expected 1, " + std::to_string(N) + " diagonal or " + std::to_string(N * N) + " full entries");
    }
  }

  void vec3(const std::string& sec, const std::string& key, Vec3& out) const {
    auto v = raw(sec, key);
    if (!v) return;
    const std::vector<double> d = list(sec, key, *v);
    if (d.size() == 1)
      out = Vec3::Constant(d[0]);
    else if (d.size() == 3)
      out = Vec3(d[0], d[1], d[2]);
    else
      fail(sec, key, "expected 1 or 3 entries");
  }

  template <typename Enum>
  void choice(const std::string& sec, const std::string& key, Enum& out,
              const std::vector<std::pair<std::string, Enum>>& options) const {
    auto v = raw(sec, key);
    if (!v) return;
    for (const auto& [name, value] : options)
      if (name == *v) {
        out = value;
        return;
      }
    std::string names;
    for (const auto& o : options) names += (names.empty() ? "" : "|") + o.first;
    fail(sec, key, "expected one of " + names + ", got '" + *v + "'");
  }

  void check_schema() const {
    for (const auto& [name, node] : tree_) {
      auto it = kSchema.find(name);
      if (it == kSchema.end() || !node.data().empty()) {
        std::ostringstream os;
        os << origin_ << ": unknown section or top-level key '" << name << "'";
        throw ConfigError(os.str());
      }
      for (const auto& kv : node)
        if (!it->second.count(kv.first)) fail(name, kv.first, "unknown key");
    }
  }

 private:
  const pt::ptree& tree_;
  const std::string& text_;
  std::string origin_;
};

void read_chief(const Reader& r, const std::string& sec, ChiefOrbit& c) {
  r.real(sec, "a", c.a);
  r.real(sec, "e", c.e);
  r.angle(sec, "i", c.i);
  r.angle(sec, "arg_perigee", c.arg_perigee);
  r.angle(sec, "raan", c.raan);
  r.angle(sec, "nu0", c.nu0);
}

void read_formation(const Reader& r, const std::string& sec, FormationParams& f) {
  r.real(sec, "rho", f.rho);
  r.angle(sec, "theta", f.theta);
  r.real(sec, "a", f.a_off);
  r.real(sec, "b", f.b_off);
  r.real(sec, "m", f.m_slope);
  r.real(sec, "n", f.n_slope);
}

const std::vector<std::pair<std::string, SdcVariant>> kSdc = {{"sdc1", SdcVariant::Sdc1},
                                                              {"sdc2", SdcVariant::Sdc2}};
const std::vector<std::pair<std::string, FiniteSdreScheme>> kScheme = {
    {"receding", FiniteSdreScheme::Receding},
    {"anchored", FiniteSdreScheme::Anchored},
    {"stepwise", FiniteSdreScheme::Stepwise}};
const std::vector<std::pair<std::string, GuessKind>> kGuess = {{"regulator", GuessKind::Regulator},
                                                               {"tracking", GuessKind::Tracking}};

std::vector<std::pair<std::string, ControllerKind>> kind_options() {
  std::vector<std::pair<std::string, ControllerKind>> out;
  for (auto k : {ControllerKind::None, ControllerKind::Lqr, ControllerKind::Sdre, ControllerKind::SdreIntegral,
                 ControllerKind::FiniteSdre, ControllerKind::Mpsp, ControllerKind::Gmpsp, ControllerKind::NnLqr})
    out.emplace_back(to_string(k), k);
  return out;
}

template <typename Enum>
std::string name_of(Enum v, const std::vector<std::pair<std::string, Enum>>& options) {
  for (const auto& o : options)
    if (o.second == v) return o.first;
  return "?";
}

}  // namespace

Scenario parse_config_text(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << origin << ":" << e.line() << ": " << e.message();
    throw ConfigError(os.str());
  }
  const Reader r(tree, text, origin);
  r.check_schema();

  Scenario s;
  if (auto v = r.raw("scenario", "name")) s.name = *v;
  r.real("scenario", "tf", s.tf);
  r.real("scenario", "dt", s.dt);
  r.real("scenario", "settle_threshold_pct", s.settle_threshold_pct);

  read_chief(r, "chief", s.chief);
  if (r.section("truth_chief")) {
    ChiefOrbit t = s.chief;  // unspecified elements follow the believed chief
    read_chief(r, "truth_chief", t);
    s.truth_chief = t;
  }

  r.real("gravity", "mu", s.gravity.mu);
  r.real("gravity", "Re", s.gravity.Re);
  r.real("gravity", "J2", s.gravity.J2);
  r.boolean("gravity", "j2", s.gravity.j2_enabled);

  read_formation(r, "initial", s.initial);
  read_formation(r, "desired", s.desired);

  ControllerSpec& c = s.controller;
  r.choice("controller", "kind", c.kind, kind_options());
  r.matrix<6>("controller", "Q", c.Q);
  r.matrix<3>("controller", "R", c.R);
  r.choice("controller", "guess", c.guess, kGuess);

  r.choice("sdre", "sdc", c.sdc, kSdc);
  r.integer("sdre", "series_order", c.series_order);
  r.real("sdre", "ki_scale", c.ki_scale);
  r.boolean("sdre", "j2_feedforward", c.j2_feedforward);
  r.matrix<6>("sdre", "Q_finite", c.Q_finite);
  r.choice("sdre", "scheme", c.scheme, kScheme);

  r.matrix<3>("mpsp", "R", c.mpsp.R_l);
  r.real("mpsp", "tol_rho_pct", c.mpsp.tol_rho_pct);
  r.integer("mpsp", "max_iter", c.mpsp.max_iter);
  r.matrix<3>("gmpsp", "R", c.gmpsp.R);
  r.real("gmpsp", "tol_rho_pct", c.gmpsp.tol_rho_pct);
  r.integer("gmpsp", "max_iter", c.gmpsp.max_iter);

  r.boolean("nnlqr", "enabled", c.nn.enabled);
  r.boolean("nnlqr", "costate_net", c.nn.costate_net);
  r.real("nnlqr", "R1", c.nn.R1);
  r.vec3("nnlqr", "beta", c.nn.gains.beta);
  r.vec3("nnlqr", "gamma", c.nn.gains.gamma);
  r.real("nnlqr", "theta_scale", c.nn.gains.theta_scale);
  r.real("nnlqr", "k_tau", c.nn.k_tau);
  r.boolean("nnlqr", "trig_terms", c.nn.trig_terms);

  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return s;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

namespace {

std::string num(double v) { return fmt17(v); }
std::string rad(double v) { return fmt17(v) + " rad"; }
std::string onoff(bool b) { return b ? "on" : "off"; }

template <typename M>
std::string mat(const M& m) {
  const bool diag = m.isDiagonal(0.0);
  std::string out;
  if (diag) {
    for (int i = 0; i < m.rows(); ++i) out += (i ? " " : "") + fmt17(m(i, i));
  } else {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) out += (i || j ? " " : "") + fmt17(m(i, j));
  }
  return out;
}

std::string vec(const Vec3& v) { return fmt17(v(0)) + " " + fmt17(v(1)) + " " + fmt17(v(2)); }

void write_chief(std::ostream& os, const char* sec, const ChiefOrbit& c) {
  os << "[" << sec << "]\n"
     << "a = " << num(c.a) << "\n"
     << "e = " << num(c.e) << "\n"
     << "i = " << rad(c.i) << "\n"
     << "arg_perigee = " << rad(c.arg_perigee) << "\n"
     << "raan = " << rad(c.raan) << "\n"
     << "nu0 = " << rad(c.nu0) << "\n\n";
}

void write_formation(std::ostream& os, const char* sec, const FormationParams& f) {
  os << "[" << sec << "]\n"
     << "rho = " << num(f.rho) << "\n"
     << "theta = " << rad(f.theta) << "\n"
     << "a = " << num(f.a_off) << "\n"
     << "b = " << num(f.b_off) << "\n"
     << "m = " << num(f.m_slope) << "\n"
     << "n = " << num(f.n_slope) << "\n\n";
}

}  // namespace

std::string serialize_config(const Scenario& s) {
  if (s.name.find_first_of("\n;=") != std::string::npos)
    throw ConfigError("serialize_config: scenario name must not contain newlines, ';' or '='");
  std::ostringstream os;
  const ControllerSpec& c = s.controller;
  os << "[scenario]\n"
     << "name = " << s.name << "\n"
     << "tf = " << num(s.tf) << "\n"
     << "dt = " << num(s.dt) << "\n"
     << "settle_threshold_pct = " << num(s.settle_threshold_pct) << "\n\n";
  write_chief(os, "chief", s.chief);
  if (s.truth_chief) write_chief(os, "truth_chief", *s.truth_chief);
  os << "[gravity]\n"
     << "mu = " << num(s.gravity.mu) << "\n"
     << "Re = " << num(s.gravity.Re) << "\n"
     << "J2 = " << num(s.gravity.J2) << "\n"
     << "j2 = " << onoff(s.gravity.j2_enabled) << "\n\n";
  write_formation(os, "initial", s.initial);
  write_formation(os, "desired", s.desired);
  os << "[controller]\n"
     << "kind = " << to_string(c.kind) << "\n"
     << "Q = " << mat(c.Q) << "\n"
     << "R = " << mat(c.R) << "\n"
     << "guess = " << name_of(c.guess, kGuess) << "\n\n";
  os << "[sdre]\n"
     << "sdc = " << name_of(c.sdc, kSdc) << "\n"
     << "series_order = " << c.series_order << "\n"
     << "ki_scale = " << num(c.ki_scale) << "\n"
     << "j2_feedforward = " << onoff(c.j2_feedforward) << "\n"
     << "Q_finite = " << mat(c.Q_finite) << "\n"
     << "scheme = " << name_of(c.scheme, kScheme) << "\n\n";
  os << "[mpsp]\n"
     << "R = " << mat(c.mpsp.R_l) << "\n"
     << "tol_rho_pct = " << num(c.mpsp.tol_rho_pct) << "\n"
     << "max_iter = " << c.mpsp.max_iter << "\n\n";
  os << "[gmpsp]\n"
     << "R = " << mat(c.gmpsp.R) << "\n"
     << "tol_rho_pct = " << num(c.gmpsp.tol_rho_pct) << "\n"
     << "max_iter = " << c.gmpsp.max_iter << "\n\n";
  os << "[nnlqr]\n"
     << "enabled = " << onoff(c.nn.enabled) << "\n"
     << "costate_net = " << onoff(c.nn.costate_net) << "\n"
     << "R1 = " << num(c.nn.R1) << "\n"
     << "beta = " << vec(c.nn.gains.beta) << "\n"
     << "gamma = " << vec(c.nn.gains.gamma) << "\n"
     << "theta_scale = " << num(c.nn.gains.theta_scale) << "\n"
     << "k_tau = " << num(c.nn.k_tau) << "\n"
     << "trig_terms = " << onoff(c.nn.trig_terms) << "\n";
  return os.str();
}

}  // namespace sff
