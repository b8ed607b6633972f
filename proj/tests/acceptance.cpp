// Runs the default ladder and judges each acceptance criterion from the files
// the run leaves behind, independently of the library's own verdicts.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "triode/io.hpp"
#include "triode/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr double kEqualSpread = 1e-6;
constexpr double kSigmaRefinement = 1e-4;
constexpr double kUpperRatio = 3.0;
constexpr double kCertificateSlack = 0.02;
constexpr double kScaleRatio = 5.0;
constexpr double kWidthGrowth = 2.0;
constexpr double kGammaLimitFactor = 0.5;
constexpr double kGradientErr = 1e-6;
constexpr int kFamilyLevel = 1;

using Row = std::map<std::string, std::string>;

std::vector<Row> read_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> head;
  std::vector<Row> rows;
  auto split = [](const std::string &s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (std::getline(in, line)) head = split(line);
  while (std::getline(in, line)) {
    const auto cells = split(line);
    Row r;
    for (std::size_t k = 0; k < head.size(); ++k) r[head[k]] = k < cells.size() ? cells[k] : "";
    rows.push_back(r);
  }
  return rows;
}

double real(const Row &r, const std::string &key) {
  const auto it = r.find(key);
  if (it == r.end() || it->second.empty()) return NAN;
  return std::stod(it->second);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string list(const std::vector<double> &v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
  return s + "]";
}

bool bounded_spread(const std::vector<double> &v, double limit) {
  if (v.empty()) return false;
  double lo = INFINITY, hi = 0.0;
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) return false;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi / lo <= limit;
}

double dist(const json &a, const json &b) {
  return std::hypot(a[0].get<double>() - b[0].get<double>(), a[1].get<double>() - b[1].get<double>());
}

struct Verdict {
  std::string id;
  bool pass = false;
  std::string detail;
};

}  // namespace

int main(int argc, char **argv) {
  const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(TRIODE_CONFIG_DIR "/default.ini");
  const fs::path scratch = fs::temp_directory_path() / ("triode-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(scratch);

  triode::ExperimentConfig cfg = triode::load_config(config);
  cfg.output = scratch;
  const triode::RunResult result = triode::run(cfg);
  const fs::path dir = result.dir;

  const auto rows = read_csv(triode::io::read_file(dir / "summary.csv"));
  const json conn = json::parse(triode::io::read_file(dir / "connections.json"));
  const json acc = json::parse(triode::io::read_file(dir / "acceptance.json"));
  std::vector<json> diag;
  for (const auto &r : rows) {
    char name[32];
    std::snprintf(name, sizeof name, "eps_%g", real(r, "epsilon"));
    diag.push_back(json::parse(triode::io::read_file(dir / name / "diagnostics.json")));
  }

  std::vector<Verdict> out;
  bool all_converged = !rows.empty();
  for (const auto &r : rows) all_converged = all_converged && r.at("converged") == "1";

  {
    double lo = INFINITY, hi = 0.0;
    for (const auto &p : conn["profiles"]) {
      lo = std::min(lo, p["action"].get<double>());
      hi = std::max(hi, p["action"].get<double>());
    }
    const double sigma = conn["sigma"].get<double>();
    const double spread = (hi - lo) / sigma;
    const double refine = std::abs(conn["refined_sigma"].get<double>() - sigma) / sigma;
    out.push_back({"equal-actions", spread <= kEqualSpread && refine <= kSigmaRefinement,
                   "spread " + fmt(spread) + ", refinement " + fmt(refine)});
  }
  {
    std::vector<double> v;
    bool above = !rows.empty();
    for (const auto &r : rows) {
      const double gap = real(r, "test_energy") - real(r, "three_sigma");
      above = above && gap > 0.0;
      v.push_back(gap / real(r, "epsilon"));
    }
    out.push_back({"upper-bound", above && bounded_spread(v, kUpperRatio), "(E_test - 3s)/eps = " + list(v)});
  }
  {
    std::vector<double> v;
    bool ok = all_converged;
    for (const auto &r : rows) {
      const double value = real(r, "certificate");
      ok = ok && value <= real(r, "energy") * (1.0 + kCertificateSlack);
      v.push_back((real(r, "three_sigma") - value) / std::sqrt(real(r, "epsilon")));
    }
    out.push_back({"certificate", ok && bounded_spread(v, kScaleRatio), "(3s - value)/sqrt(eps) = " + list(v)});
  }
  {
    std::vector<double> gaps;
    bool ok = all_converged;
    for (const auto &r : rows) {
      const double e = real(r, "energy");
      ok = ok && real(r, "certificate") <= e && e <= real(r, "test_energy");
      gaps.push_back(std::abs(e - real(r, "three_sigma")));
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) ok = ok && gaps[k] < gaps[k - 1];
    out.push_back({"bracket", ok, "|E - 3s| = " + list(gaps)});
  }
  auto scaled = [&](const char *id, const char *col, double power, const char *label) {
    std::vector<double> v;
    for (const auto &r : rows) v.push_back(std::abs(real(r, col)) / std::pow(real(r, "epsilon"), power));
    out.push_back({id, all_converged && bounded_spread(v, kScaleRatio), std::string(label) + " = " + list(v)});
  };
  scaled("junction-center", "y_star", 0.25, "|y*|/eps^(1/4)");
  scaled("localization", "localization", 0.25, "dist/eps^(1/4)");
  {
    std::vector<double> v;
    bool ok = all_converged;
    for (const auto &r : rows) v.push_back(real(r, "max_r1") / real(r, "epsilon"));
    for (std::size_t k = 1; k < v.size(); ++k) ok = ok && v[k] <= kWidthGrowth * v[k - 1];
    for (double x : v) ok = ok && std::isfinite(x);
    out.push_back({"width", ok, "max r1/eps = " + list(v)});
  }
  {
    const json &d = diag.back();
    Verdict c{"triple-point", false, "no triple point"};
    if (d.contains("triple_point") && d.contains("width")) {
      const json &t = d["triple_point"];
      const double bound = d["width"]["C0"].get<double>() * d["epsilon"].get<double>();
      const double worst = std::max(dist(t["P"], t["Q"]), dist(t["P"], t["R"]));
      c.pass = t["sign_changes"].get<int>() >= 1 && worst <= bound;
      c.detail = "max(PQ, PR) = " + fmt(worst) + " vs C0 eps = " + fmt(bound);
    }
    out.push_back(c);
  }
  {
    const json &d = diag.back();
    Verdict c{"discretization", false, "no junction families"};
    if (d.contains("families")) {
      const json &f = d["families"];
      const double unit = f["spacing"].get<double>() / 8.0;
      const json &p = f["P"];
      bool bounds = true;
      std::vector<json> all;
      for (const char *key : {"Q", "R"}) {
        const json &pts = f[key];
        bounds = bounds && pts.size() == (1u << kFamilyLevel);
        for (std::size_t j = 0; j < pts.size(); ++j) {
          bounds = bounds && dist(pts[j], p) <= (32.0 * (j + 1) + 1.0) * unit + 1e-9;
          all.push_back(pts[j]);
        }
      }
      double sep = INFINITY;
      for (std::size_t a = 0; a < all.size(); ++a) {
        for (std::size_t b = a + 1; b < all.size(); ++b) sep = std::min(sep, dist(all[a], all[b]));
      }
      c.pass = bounds && sep >= 6.0 * unit - 1e-9;
      c.detail = "min pair distance " + fmt(sep) + " vs 6 C0 eps = " + fmt(6.0 * unit);
    } else {
      for (const auto &e : d["errors"]) {
        if (e.get<std::string>().rfind("discretization", 0) == 0) c.detail = e.get<std::string>();
      }
    }
    out.push_back(c);
  }
  {
    std::vector<double> v;
    bool ok = all_converged && rows.size() >= 2;
    for (const auto &r : rows) v.push_back(real(r, "l1_best"));
    for (std::size_t k = 1; k < v.size(); ++k) ok = ok && v[k] < v[k - 1];
    ok = ok && v.back() < kGammaLimitFactor * v.front();
    out.push_back({"gamma-limit", ok, "L1 = " + list(v)});
  }
  {
    const json &s = acc["soundness"];
    // Field dumps must reload to the hashes in the summary.
    bool hashes = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "eps_%g", real(rows[k], "epsilon"));
      const auto ff = triode::io::read_field(dir / name / "field.bin");
      hashes = hashes && triode::io::hex64(triode::io::field_hash(ff.field)) == rows[k].at("field_fnv1a");
    }
    const double adj = s["adjoint_max_rel"].get<double>(), gw = s["grad_w_max_err"].get<double>();
    const bool det = s["deterministic"].get<bool>();
    out.push_back({"soundness", adj <= kGradientErr && gw <= kGradientErr && det && hashes,
                   "adjoint " + fmt(adj) + ", grad W " + fmt(gw) + ", deterministic " + (det ? "yes" : "no") +
                       ", dumps " + (hashes ? "match" : "differ")});
  }

  const std::string first_summary = triode::io::read_file(dir / "summary.csv");
  const triode::RunResult again = triode::run(cfg);
  const bool reproducible = triode::io::read_file(again.dir / "summary.csv") == first_summary;

  int failures = 0;
  for (const Verdict &v : out) {
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", v.id.c_str(), v.detail.c_str());
    failures += !v.pass;
  }
  int disagreements = 0;
  for (const triode::Check &c : result.checks) {
    for (const Verdict &v : out) {
      if (v.id == c.id && v.pass != c.pass) {
        std::printf("note: library verdict for %s is %s\n", c.id.c_str(), c.pass ? "pass" : "fail");
        ++disagreements;
      }
    }
  }
  std::printf("rerun summary byte-identical: %s\n", reproducible ? "yes" : "no");
  std::printf("%d of %zu criteria failed\n", failures, out.size());
  fs::remove_all(scratch);
  return failures == 0 && disagreements == 0 && reproducible ? 0 : 1;
}
