// bachgeom command-line front end.  Builds a JSON config from flags and an
// optional config file, runs it through the C API and writes JSON/CSV.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bachgeom/bachgeom.h"

using nlohmann::json;

namespace {

const char* const kToleranceNames[] = {"pd_floor", "fd_tol",   "alg_tol",    "cross_tol", "div_tol",
                                       "eig_tol",  "zero_tol", "bach_floor", "norm_tol",  "newton_tol"};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::string item;
  std::stringstream in(s);
  const char sep = s.find('x') != std::string::npos ? 'x' : ',';
  while (std::getline(in, item, sep)) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "cannot parse '" + s + "'");
    }
  }
  return v;
}

json parse_grid(const std::string& s) {
  const std::vector<double> v = parse_list(s, "--grid");
  if (v.size() == 1) return static_cast<int>(v[0]);
  if (v.size() != 4) throw CLI::ValidationError("--grid", "expected N or NxNxNxN");
  json g = json::array();
  for (double x : v) g.push_back(static_cast<int>(x));
  return g;
}

json env_tolerances() {
  json t = json::object();
  for (const char* name : kToleranceNames) {
    std::string var = "BACHGEOM_TOL_";
    for (const char* c = name; *c; ++c) var += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    if (const char* v = std::getenv(var.c_str())) {
      try {
        t[name] = std::stod(v);
      } catch (const std::exception&) {
        throw CLI::ValidationError(var, std::string("cannot parse '") + v + "'");
      }
    }
  }
  return t;
}

// Writes each equally sized numeric array under result.fields as a CSV column.
bool write_csv(const json& doc, const std::string& path) {
  if (!doc.contains("result") || !doc["result"].contains("fields")) return false;
  const json& f = doc["result"]["fields"];
  std::vector<std::string> names;
  std::size_t rows = 0;
  for (auto it = f.begin(); it != f.end(); ++it) {
    if (!it.value().is_array()) continue;
    if (names.empty()) rows = it.value().size();
    if (it.value().size() != rows) continue;
    names.push_back(it.key());
  }
  std::ofstream out(path);
  if (!out) return false;
  out.precision(17);
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << f[names[c]][r].get<double>();
    out << '\n';
  }
  return static_cast<bool>(out);
}

struct Common {
  std::string config_path;
  std::string metric;
  std::vector<std::string> params;
  std::vector<std::string> tolerances;
  std::string out;
  std::string csv;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c, bool with_metric = true) {
  sub->add_option("--config", c.config_path, "JSON config file; flags override its fields");
  if (with_metric) {
    sub->add_option("--metric", c.metric, "catalog metric name");
    sub->add_option("--param", c.params, "metric parameter name=value (repeatable)");
  }
  sub->add_option("--tol", c.tolerances, "tolerance override name=value (repeatable)");
  sub->add_option("--out", c.out, "write the JSON result here instead of stdout");
  sub->add_option("--csv", c.csv, "write per-node fields as CSV");
  sub->add_option("--threads", c.threads, "thread budget")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bach-tensor and scalar-Bach curvature engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bg_version());

  Common c;
  std::string at, grid, chart, bach, f, report, factor, convention, check, phi, kcand, suite;
  std::optional<double> t, k, radius, nu;
  std::optional<int> balls;
  std::optional<long long> seed;
  bool fields = false;

  auto* curv = app.add_subcommand("curvature", "curvature bundle and Bach tensor at a point");
  add_common(curv, c);
  curv->add_option("--at", at, "point x1,x2,x3,x4");
  curv->add_option("--bach", bach, "weyl, ricci or both")->check(CLI::IsMember({"weyl", "ricci", "both"}));
  curv->add_option("--t", t, "coupling in F^B = S + t |B|^(1/2)");

  auto* def = app.add_subcommand("deform", "Aubin deformation g + d(kf) (x) d(kf)");
  add_common(def, c);
  def->add_option("--f", f, "deforming function, expression in x1..x4");
  def->add_option("--k", k, "scale of f");
  def->add_option("--report", report, "curvature, bach-error or identity")
      ->check(CLI::IsMember({"curvature", "bach-error", "identity"}));
  def->add_option("--at", at, "point x1,x2,x3,x4");
  def->add_option("--grid", grid, "N or NxNxNxN");
  def->add_option("--chart", chart, "box or ball")->check(CLI::IsMember({"box", "ball"}));

  auto* conf = app.add_subcommand("conformal", "conformal laws and covariance checks");
  add_common(conf, c);
  conf->add_option("--factor", factor, "conformal factor, expression in x1..x4");
  conf->add_option("--convention", convention, "exponential or power")
      ->check(CLI::IsMember({"exponential", "power"}));
  conf->add_option("--t", t, "coupling in F^B");
  conf->add_option("--check", check, "laws, covariance or bach")->check(CLI::IsMember({"laws", "covariance", "bach"}));
  conf->add_option("--phi", phi, "test function for the covariance check");
  conf->add_option("--at", at, "point x1,x2,x3,x4");

  auto* eig = app.add_subcommand("eigen", "principal eigenpair and sign class of the modified conformal Laplacian");
  add_common(eig, c);
  eig->add_option("--t", t, "coupling in F^B");
  eig->add_option("--grid", grid, "N or NxNxNxN");
  eig->add_option("--chart", chart, "box or ball")->check(CLI::IsMember({"box", "ball"}));
  eig->add_flag("--fields", fields, "include per-node fields in the result");

  auto* nrm = app.add_subcommand("normalize", "minimize the quotient and rescale to constant F^B");
  add_common(nrm, c);
  nrm->add_option("--t", t, "coupling in F^B");
  nrm->add_option("--grid", grid, "N or NxNxNxN");
  nrm->add_option("--chart", chart, "box or ball")->check(CLI::IsMember({"box", "ball"}));
  nrm->add_flag("--fields", fields, "include per-node fields in the result");

  auto* con = app.add_subcommand("construct", "double deformation on balls and the functional Phi");
  add_common(con, c);
  con->add_option("--t", t, "coupling in F^B");
  con->add_option("--balls", balls, "number of ball slots h");
  con->add_option("--radius", radius, "ball radius");
  con->add_option("--nu", nu, "well depth parameter");
  con->add_option("--k-candidates", kcand, "comma-separated k values");
  con->add_option("--grid", grid, "ball resolution NrxNsxNxixNxi");

  auto* ver = app.add_subcommand("verify", "property and identity suites");
  add_common(ver, c, false);
  ver->add_option("--suite", suite, "suite name or all");
  ver->add_option("--seed", seed, "random seed");

  auto* cat = app.add_subcommand("catalog", "list the metric catalog");
  add_common(cat, c, false);

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  json cfg = json::object();
  try {
    if (!c.config_path.empty()) {
      std::ifstream in(c.config_path);
      if (!in) throw std::runtime_error("cannot open " + c.config_path);
      cfg = json::parse(in);
      if (!cfg.is_object()) throw std::runtime_error("config file must hold a JSON object");
      if (cfg.contains("command") && cfg["command"] != command)
        throw std::runtime_error("config file is for command " + cfg["command"].dump());
      cfg.erase("command");
    }
    json tol = env_tolerances();
    if (cfg.contains("tolerances")) tol.update(cfg["tolerances"]);
    for (const std::string& s : c.tolerances) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw std::runtime_error("--tol expects name=value");
      tol[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    }
    if (!tol.empty()) cfg["tolerances"] = tol;
    if (!c.metric.empty() || !c.params.empty()) {
      json m = cfg.contains("metric") && cfg["metric"].is_object() ? cfg["metric"] : json::object();
      if (!c.metric.empty()) m["name"] = c.metric;
      else if (cfg.contains("metric") && cfg["metric"].is_string()) m["name"] = cfg["metric"];
      for (const std::string& s : c.params) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--param expects name=value");
        m["params"][s.substr(0, eq)] = std::stod(s.substr(eq + 1));
      }
      cfg["metric"] = m;
    }
    if (!at.empty()) {
      const std::vector<double> p = parse_list(at, "--at");
      if (p.size() != 4) throw std::runtime_error("--at expects 4 coordinates");
      cfg["at"] = p;
    }
    if (!grid.empty()) cfg[command == "construct" ? "ball_resolution" : "grid"] = parse_grid(grid);
    if (!chart.empty()) cfg["chart"] = chart;
    if (!bach.empty()) cfg["bach"] = bach;
    if (!f.empty()) cfg["f"] = f;
    if (!report.empty()) cfg["report"] = report;
    if (!factor.empty()) cfg["factor"] = factor;
    if (!convention.empty()) cfg["convention"] = convention;
    if (!check.empty()) cfg["check"] = check;
    if (!phi.empty()) cfg["phi"] = phi;
    if (!kcand.empty()) cfg["k_candidates"] = parse_list(kcand, "--k-candidates");
    if (!suite.empty()) cfg["suite"] = suite;
    if (t) cfg["t"] = *t;
    if (k) cfg["k"] = *k;
    if (radius) cfg["radius"] = *radius;
    if (nu) cfg["nu"] = *nu;
    if (balls) cfg["balls"] = *balls;
    if (seed) cfg["seed"] = *seed;
    if (fields || !c.csv.empty()) cfg["fields"] = true;
  } catch (const std::exception& e) {
    std::cerr << "bachgeom: " << e.what() << '\n';
    return 1;
  }

  std::unique_ptr<bg_context, decltype(&bg_context_destroy)> ctx(bg_context_create(), bg_context_destroy);
  char* raw = nullptr;
  const int status = bg_run(ctx.get(), command.c_str(), cfg.dump().c_str(), &raw);
  std::unique_ptr<char, decltype(&bg_string_free)> text(raw, bg_string_free);
  if (!text) {
    std::cerr << "bachgeom: " << bg_last_error(ctx.get()) << '\n';
    return 1;
  }
  json doc = json::parse(text.get());
  doc["threads"] = c.threads;
  if (!c.csv.empty()) {
    if (!write_csv(doc, c.csv)) std::cerr << "bachgeom: no per-node fields written to " << c.csv << '\n';
    doc["result"].erase("fields");
  }
  const std::string body = doc.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(c.out);
    out << body;
    if (!out) {
      std::cerr << "bachgeom: cannot write " << c.out << '\n';
      return 1;
    }
  }
  if (status != BG_OK) {
    std::cerr << "bachgeom: " << bg_status_name(status) << ": " << bg_last_error(ctx.get()) << '\n';
    return bg_status_is_hypothesis_failure(status) ? 2 : 1;
  }
  return 0;
}
