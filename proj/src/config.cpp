#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "triode/error.hpp"
#include "triode/io.hpp"
#include "triode/sweep.hpp"

namespace triode {

namespace {

std::string type_name(ValueType t) {
  switch (t) {
    case ValueType::Real: return "real";
    case ValueType::Integer: return "integer";
    case ValueType::Text: return "text";
    case ValueType::RealList: return "real-list";
    case ValueType::TextList: return "text-list";
  }
  return "?";
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad(const std::string &where, const std::string &what) {
  throw Error(ErrorKind::InvalidConfig, where + ": " + what);
}

double parse_real(const std::string &where, const std::string &s) {
  double v = 0.0;
  const char *end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) bad(where, "expected a real number, got '" + s + "'");
  return v;
}

long long parse_integer(const std::string &where, const std::string &s) {
  long long v = 0;
  const char *end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) bad(where, "expected an integer, got '" + s + "'");
  return v;
}

const std::vector<std::string> kCheckIds = {"equal-actions", "upper-bound",  "certificate",    "bracket",
                                            "junction-center", "localization", "width",        "triple-point",
                                            "discretization", "gamma-limit",  "soundness"};

}  // namespace

const std::vector<SchemaEntry> &config_schema() {
  static const std::vector<SchemaEntry> schema = {
      {"potential", "kind", ValueType::Text, "cubic", "cubic | perturbed_cubic | user_polynomial", "potential family"},
      {"potential", "amplitude", ValueType::Real, "0", ">= 0", "bump amplitude (perturbed_cubic)"},
      {"potential", "radius", ValueType::Real, "0.2", "> 0", "bump radius"},
      {"potential", "center", ValueType::RealList, "0, 0", "2 values", "bump centre"},
      {"potential", "tilt", ValueType::Real, "0.5", "|tilt| < 1", "linear tilt of the bump"},
      {"potential", "tilt_angle", ValueType::Real, "0.3", "any", "tilt direction in radians"},
      {"potential", "wells", ValueType::RealList, "1, 0, -0.5, 0.8660254037844386, -0.5, -0.8660254037844386",
       "6 values", "well coordinates x1, y1, x2, y2, x3, y3 (user_polynomial)"},
      {"connection", "L", ValueType::Real, "12", "> 0", "half-length of the 1D domain"},
      {"connection", "n", ValueType::Integer, "1024", ">= 16", "1D node count"},
      {"connection", "tol_grad", ValueType::Real, "1e-10", "> 0", "gradient tolerance, scaled by 1 + sigma"},
      {"connection", "max_iter", ValueType::Integer, "200000", ">= 1", "iteration cap"},
      {"connection", "refine_L", ValueType::Real, "16", "> L", "half-length of the refined solve"},
      {"connection", "refine_n", ValueType::Integer, "2048", "> n", "node count of the refined solve"},
      {"connection", "equal_tol", ValueType::Real, "1e-6", "> 0", "relative spread allowed between the actions"},
      {"solve", "points_per_eps", ValueType::Real, "8", ">= 4", "grid rule h <= eps / points_per_eps"},
      {"solve", "grid_cap", ValueType::Integer, "513", ">= 5", "largest admissible nodes per side"},
      {"solve", "c0", ValueType::Real, "0.4", "2 c0 eps < pi/3", "boundary ramp constant"},
      {"solve", "init", ValueType::Text, "test-function",
       "test-function | constant-well | random | rotated-test-function", "initializer of the first member"},
      {"solve", "rule", ValueType::Text, "lbfgs", "lbfgs | descent", "step rule"},
      {"solve", "tol_energy", ValueType::Real, "1e-11", "> 0", "relative energy stall tolerance"},
      {"solve", "tol_grad", ValueType::Real, "0", ">= 0", "gradient max-norm tolerance, 0 for 1e-8 (1 + sigma) / eps"},
      {"solve", "max_iter", ValueType::Integer, "500000", ">= 1", "iteration cap"},
      {"solve", "starts", ValueType::Integer, "1", "1 .. 64", "starts of the first member"},
      {"diagnostics", "gamma", ValueType::Real, "0.05", "< gamma cap", "interface level"},
      {"diagnostics", "gamma0", ValueType::Real, "1.0", "> 0", "stand-in for the maximum-principle threshold"},
      {"diagnostics", "width_samples", ValueType::Integer, "50", ">= 1", "interface width samples"},
      {"diagnostics", "k", ValueType::Integer, "1", "1 .. 10", "level of the balanced junction families"},
      {"ladder", "epsilons", ValueType::RealList, "0.2, 0.1, 0.05", "strictly descending, in (0, 1)", "epsilon ladder"},
      {"output", "directory", ValueType::Text, "runs", "path", "parent of the run directory"},
      {"run", "seed", ValueType::Integer, "1", ">= 0", "random seed"},
      {"acceptance", "checks", ValueType::TextList, "all", "all | none | check ids", "enabled acceptance checks"},
  };
  return schema;
}

nlohmann::json schema_json() {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  for (const SchemaEntry &e : config_schema()) {
    j["sections"][e.section][e.key] = {{"type", type_name(e.type)},
                                       {"default", e.default_value},
                                       {"constraint", e.constraint},
                                       {"doc", e.doc}};
  }
  j["checks"] = kCheckIds;
  return j;
}

PotentialSpec ExperimentConfig::potential_spec() const {
  switch (parse_potential_kind(potential)) {
    case PotentialKind::Cubic: return PotentialSpec::cubic();
    case PotentialKind::PerturbedCubic: return PotentialSpec::perturbed_cubic(perturbation);
    case PotentialKind::UserPolynomial: return PotentialSpec::user_polynomial(WellSet{wells});
  }
  throw Error(ErrorKind::InvalidConfig, "unknown potential kind");
}

void ExperimentConfig::validate() const {
  try {
    (void)parse_potential_kind(potential);
  } catch (const Error &) {
    bad("potential.kind", "unknown kind '" + potential + "'");
  }
  if (perturbation.amplitude < 0.0) bad("potential.amplitude", "must be >= 0");
  if (!(perturbation.radius > 0.0)) bad("potential.radius", "must be > 0");
  if (!(std::abs(perturbation.tilt) < 1.0)) bad("potential.tilt", "must satisfy |tilt| < 1");
  if (!(connection.L > 0.0)) bad("connection.L", "must be > 0");
  if (connection.n < 16) bad("connection.n", "must be >= 16");
  if (!(connection.tol_grad > 0.0)) bad("connection.tol_grad", "must be > 0");
  if (connection.max_iter < 1) bad("connection.max_iter", "must be >= 1");
  if (!(refine_L > connection.L)) bad("connection.refine_L", "must exceed L");
  if (!(refine_n > connection.n)) bad("connection.refine_n", "must exceed n");
  if (!(equal_tol > 0.0)) bad("connection.equal_tol", "must be > 0");
  if (!(solve.points_per_eps >= 4.0)) bad("solve.points_per_eps", "must be >= 4 (h <= eps/4)");
  if (grid_cap < 5) bad("solve.grid_cap", "must be >= 5");
  if (solve.starts < 1 || solve.starts > 64) bad("solve.starts", "must lie in 1 .. 64");
  if (solve.init == Initializer::WarmStart) bad("solve.init", "warm-start is reserved for continuation");
  if (!(diagnostics.gamma > 0.0)) bad("diagnostics.gamma", "must be > 0");
  if (!(diagnostics.gamma0 > 0.0)) bad("diagnostics.gamma0", "must be > 0");
  if (diagnostics.width_samples < 1) bad("diagnostics.width_samples", "must be >= 1");
  if (diagnostics.k < 1 || diagnostics.k > 10) bad("diagnostics.k", "must lie in 1 .. 10");
  if (ladder.empty()) bad("ladder.epsilons", "empty epsilon ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double eps = ladder[i];
    if (!(eps > 0.0 && eps < 1.0)) bad("ladder.epsilons", "every epsilon must lie in (0, 1)");
    if (i > 0 && !(eps < ladder[i - 1])) bad("ladder.epsilons", "ladder must be strictly descending");
    SolveConfig sc = solve;
    sc.epsilon = eps;
    sc.grid = 0;
    const int n = sc.resolved_grid();
    if (n > grid_cap) {
      bad("ladder.epsilons", "eps = " + io::format_double(eps) + " needs N = " + std::to_string(n) +
                                 " above the grid cap " + std::to_string(grid_cap));
    }
    try {
      sc.validate();
    } catch (const Error &e) {
      bad("solve", e.what());
    }
  }
  for (const std::string &c : checks) {
    if (c == "all" || c == "none") continue;
    if (std::find(kCheckIds.begin(), kCheckIds.end(), c) == kCheckIds.end()) {
      bad("acceptance.checks", "unknown check '" + c + "'");
    }
  }
}

ExperimentConfig parse_config(const std::string &text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c;
  const auto &schema = config_schema();
  for (const auto &[section, body] : tree) {
    if (body.empty()) bad(section, "key outside any section");
    for (const auto &[key, node] : body) {
      const std::string where = section + "." + key;
      const auto it = std::find_if(schema.begin(), schema.end(),
                                   [&](const SchemaEntry &e) { return e.section == section && e.key == key; });
      if (it == schema.end()) bad(where, "unknown key");
      const std::string v = trim(node.data());
      auto real = [&] { return parse_real(where, v); };
      auto integer = [&] { return parse_integer(where, v); };
      auto reals = [&](std::size_t expect) {
        std::vector<double> out;
        for (const std::string &s : split_list(v)) out.push_back(parse_real(where, s));
        if (expect != 0 && out.size() != expect) bad(where, "expected " + std::to_string(expect) + " values");
        return out;
      };
      if (where == "potential.kind") c.potential = v;
      else if (where == "potential.amplitude") c.perturbation.amplitude = real();
      else if (where == "potential.radius") c.perturbation.radius = real();
      else if (where == "potential.center") {
        const auto p = reals(2);
        c.perturbation.center = {p[0], p[1]};
      } else if (where == "potential.tilt") c.perturbation.tilt = real();
      else if (where == "potential.tilt_angle") c.perturbation.tilt_angle = real();
      else if (where == "potential.wells") {
        const auto p = reals(6);
        for (int i = 0; i < 3; ++i) c.wells[i] = {p[2 * i], p[2 * i + 1]};
      } else if (where == "connection.L") c.connection.L = real();
      else if (where == "connection.n") c.connection.n = static_cast<int>(integer());
      else if (where == "connection.tol_grad") c.connection.tol_grad = real();
      else if (where == "connection.max_iter") c.connection.max_iter = static_cast<int>(integer());
      else if (where == "connection.refine_L") c.refine_L = real();
      else if (where == "connection.refine_n") c.refine_n = static_cast<int>(integer());
      else if (where == "connection.equal_tol") c.equal_tol = real();
      else if (where == "solve.points_per_eps") c.solve.points_per_eps = real();
      else if (where == "solve.grid_cap") c.grid_cap = static_cast<int>(integer());
      else if (where == "solve.c0") c.solve.c0 = real();
      else if (where == "solve.init") {
        try {
          c.solve.init = parse_initializer(v);
        } catch (const Error &) {
          bad(where, "unknown initializer '" + v + "'");
        }
      } else if (where == "solve.rule") {
        try {
          c.solve.rule = parse_step_rule(v);
        } catch (const Error &) {
          bad(where, "unknown step rule '" + v + "'");
        }
      } else if (where == "solve.tol_energy") c.solve.tol_energy = real();
      else if (where == "solve.tol_grad") c.solve.tol_grad = real();
      else if (where == "solve.max_iter") c.solve.max_iter = static_cast<int>(integer());
      else if (where == "solve.starts") c.solve.starts = static_cast<int>(integer());
      else if (where == "diagnostics.gamma") c.diagnostics.gamma = real();
      else if (where == "diagnostics.gamma0") c.diagnostics.gamma0 = real();
      else if (where == "diagnostics.width_samples") c.diagnostics.width_samples = static_cast<int>(integer());
      else if (where == "diagnostics.k") c.diagnostics.k = static_cast<int>(integer());
      else if (where == "ladder.epsilons") c.ladder = reals(0);
      else if (where == "output.directory") c.output = v;
      else if (where == "run.seed") {
        const long long s = integer();
        if (s < 0) bad(where, "must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
      } else if (where == "acceptance.checks") c.checks = split_list(v);
    }
  }
  c.solve.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  try {
    return parse_config(io::read_file(path));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::Io) throw;
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + msg);
  }
}

nlohmann::json to_json(const ExperimentConfig &c) {
  nlohmann::json j;
  j["potential"] = {{"kind", c.potential},
                    {"amplitude", c.perturbation.amplitude},
                    {"radius", c.perturbation.radius},
                    {"center", {c.perturbation.center.x, c.perturbation.center.y}},
                    {"tilt", c.perturbation.tilt},
                    {"tilt_angle", c.perturbation.tilt_angle},
                    {"wells", {c.wells[0].x, c.wells[0].y, c.wells[1].x, c.wells[1].y, c.wells[2].x, c.wells[2].y}}};
  j["connection"] = {{"L", c.connection.L},           {"n", c.connection.n},
                     {"tol_grad", c.connection.tol_grad}, {"max_iter", c.connection.max_iter},
                     {"refine_L", c.refine_L},        {"refine_n", c.refine_n},
                     {"equal_tol", c.equal_tol}};
  j["solve"] = {{"points_per_eps", c.solve.points_per_eps},
                {"grid_cap", c.grid_cap},
                {"c0", c.solve.c0},
                {"init", to_string(c.solve.init)},
                {"rule", to_string(c.solve.rule)},
                {"tol_energy", c.solve.tol_energy},
                {"tol_grad", c.solve.tol_grad},
                {"max_iter", c.solve.max_iter},
                {"starts", c.solve.starts}};
  j["diagnostics"] = {{"gamma", c.diagnostics.gamma},
                      {"gamma0", c.diagnostics.gamma0},
                      {"width_samples", c.diagnostics.width_samples},
                      {"k", c.diagnostics.k}};
  j["ladder"] = {{"epsilons", c.ladder}};
  j["run"] = {{"seed", c.seed}};
  j["acceptance"] = {{"checks", c.checks}};
  return j;
}

std::string to_ini(const ExperimentConfig &c) {
  const nlohmann::json j = to_json(c);
  std::ostringstream out;
  auto value = [](const nlohmann::json &v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return io::format_double(v.get<double>());
    if (v.is_array()) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) s += ", ";
        s += v[i].is_string() ? v[i].get<std::string>()
             : v[i].is_number_float() ? io::format_double(v[i].get<double>())
                                      : v[i].dump();
      }
      return s;
    }
    return v.dump();
  };
  for (const std::string section : {"potential", "connection", "solve", "diagnostics", "ladder", "run", "acceptance"}) {
    out << "[" << section << "]\n";
    for (const auto &[k, v] : j[section].items()) out << k << " = " << value(v) << "\n";
    out << "\n";
  }
  out << "[output]\ndirectory = " << c.output.string() << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig &c) { return io::hex64(io::fnv1a(to_json(c).dump())); }

const std::vector<std::string> &acceptance_check_ids() { return kCheckIds; }

}  // namespace triode
