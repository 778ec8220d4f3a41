#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "bachgeom/aubin.hpp"
#include "bachgeom/catalog.hpp"
#include "bachgeom/pipeline.hpp"
#include "bachgeom/spectral.hpp"

namespace bachgeom::cmd {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Tolerances {
  double pd_floor = 1e-10;
  double fd_tol = 1e-5;
  double alg_tol = 1e-9;
  double cross_tol = 1e-6;
  double div_tol = 1e-5;
  double eig_tol = 1e-9;
  double zero_tol = 1e-6;
  double bach_floor = 1e-8;
  double norm_tol = 1e-3;
  double newton_tol = 1e-10;
};

Tolerances tolerances_from(const json& cfg) {
  Tolerances t;
  if (!cfg.contains("tolerances")) return t;
  const json& j = cfg.at("tolerances");
  if (!j.is_object()) fail(ErrorCode::kConfigParse, "tolerances must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) fail(ErrorCode::kConfigParse, "tolerance '" + it.key() + "' must be a number");
    const double v = it.value().get<double>();
    if (!(v > 0.0)) fail(ErrorCode::kConfigParse, "tolerance '" + it.key() + "' must be positive");
    const std::string& k = it.key();
    if (k == "pd_floor") t.pd_floor = v;
    else if (k == "fd_tol") t.fd_tol = v;
    else if (k == "alg_tol") t.alg_tol = v;
    else if (k == "cross_tol") t.cross_tol = v;
    else if (k == "div_tol") t.div_tol = v;
    else if (k == "eig_tol") t.eig_tol = v;
    else if (k == "zero_tol") t.zero_tol = v;
    else if (k == "bach_floor") t.bach_floor = v;
    else if (k == "norm_tol") t.norm_tol = v;
    else if (k == "newton_tol") t.newton_tol = v;
    else fail(ErrorCode::kConfigParse, "unknown tolerance '" + k + "'");
  }
  return t;
}

json tolerances_json(const Tolerances& t) {
  return {{"pd_floor", t.pd_floor},   {"fd_tol", t.fd_tol},         {"alg_tol", t.alg_tol},
          {"cross_tol", t.cross_tol}, {"div_tol", t.div_tol},       {"eig_tol", t.eig_tol},
          {"zero_tol", t.zero_tol},   {"bach_floor", t.bach_floor}, {"norm_tol", t.norm_tol},
          {"newton_tol", t.newton_tol}};
}

json conventions() {
  return {
      {"index", "R_ijkl fully lowered with R_ijij > 0 on round spheres; Ric_ij = g^kl R_kilj; S = g^ij Ric_ij"},
      {"coordinates", "x1..x4, zero-based arrays"},
      {"bach", "B_ij = W_ikjl,lk + (1/2) R_kl W_ikjl; Ricci form used for norms"},
      {"bach_norm", "|B| = (B_ij B^ij)^(1/2)"},
      {"scalar_bach", "F^B = S + t |B|^(1/2)"},
      {"operator", "L = -6 Lap_g + F^B"},
      {"conformal", "exponential: g~ = exp(2u) g; power: g~ = u^2 g"},
      {"deformation", "gbar = g + d(kf) (x) d(kf)"},
      {"double_deformation", "g'' = psi g + k^2 dpsi (x) dpsi; g~'' = (1 + k^2 |dpsi|^2_g / psi)^(-1/2) g''"},
      {"volume", "dV_g = sqrt(det g) dx"},
  };
}

template <class T>
T opt(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigParse, std::string("field '") + key + "': " + e.what());
  }
}

Params params_from(const json& j) {
  Params p;
  if (j.is_null()) return p;
  if (!j.is_object()) fail(ErrorCode::kConfigParse, "params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) fail(ErrorCode::kConfigParse, "parameter '" + it.key() + "' must be a number");
    p[it.key()] = it.value().get<double>();
  }
  return p;
}

Point point_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != kDim) fail(ErrorCode::kConfigParse, std::string(what) + " must have 4 coordinates");
  Point p{};
  for (int a = 0; a < kDim; ++a) {
    if (!j[a].is_number()) fail(ErrorCode::kConfigParse, std::string(what) + " coordinates must be numbers");
    p[a] = j[a].get<double>();
  }
  return p;
}

struct MetricChoice {
  MetricField field;
  std::string name;
};

MetricChoice metric_from(const json& cfg) {
  if (!cfg.contains("metric")) fail(ErrorCode::kConfigParse, "missing 'metric'");
  const json& m = cfg.at("metric");
  if (m.is_string()) return {make_metric(m.get<std::string>()), m.get<std::string>()};
  if (!m.is_object()) fail(ErrorCode::kConfigParse, "'metric' must be a name or an object");
  if (m.contains("components")) {
    UserMetricSpec spec;
    spec.label = opt<std::string>(m, "label", "user");
    const json& c = m.at("components");
    if (!c.is_array() || c.size() != 10)
      fail(ErrorCode::kConfigParse, "user metric needs 10 upper-triangle components g11 g12 g13 g14 g22 g23 g24 g33 g34 g44");
    for (int n = 0; n < 10; ++n) spec.components[n] = c[n].get<std::string>();
    spec.params = params_from(m.contains("params") ? m.at("params") : json());
    const std::string prov = opt<std::string>(m, "provenance", "dual-number");
    if (prov == "dual-number") spec.provenance = Provenance::kDualNumber;
    else if (prov == "finite-difference") spec.provenance = Provenance::kFiniteDifference;
    else fail(ErrorCode::kConfigParse, "provenance must be dual-number or finite-difference");
    spec.fd_step = opt<double>(m, "fd_step", 0.05);
    if (m.contains("periodic_box")) {
      const Point sides = point_from(m.at("periodic_box"), "periodic_box");
      spec.domain = ChartDomain::periodic_box(sides);
    }
    return {make_user_metric(spec), spec.label};
  }
  const std::string name = opt<std::string>(m, "name", "");
  if (name.empty()) fail(ErrorCode::kConfigParse, "metric object needs 'name' or 'components'");
  return {make_metric(name, params_from(m.contains("params") ? m.at("params") : json())), name};
}

ChartGrid box_grid(const MetricField& g, const json& cfg, int fallback) {
  if (opt<std::string>(cfg, "chart", "box") != "box")
    fail(ErrorCode::kNonPeriodicGrid, "this command needs a periodic box chart");
  const ChartDomain& dom = g.domain();
  ChartSpec cs;
  std::array<int, kDim> res{fallback, fallback, fallback, fallback};
  if (cfg.contains("grid")) {
    const json& j = cfg.at("grid");
    if (j.is_number_integer()) res.fill(j.get<int>());
    else if (j.is_array() && j.size() == kDim)
      for (int a = 0; a < kDim; ++a) res[a] = j[a].get<int>();
    else fail(ErrorCode::kConfigParse, "grid must be an integer or 4 integers");
  }
  for (int a = 0; a < kDim; ++a) {
    if (!dom.periodic[a]) fail(ErrorCode::kNonPeriodicGrid, "metric '" + g.label() + "' is not defined on a periodic box");
    cs.extents[a] = dom.hi[a] - dom.lo[a];
    cs.resolution[a] = res[a];
  }
  return make_chart(cs);
}

// Random points inside the region where each catalog chart is regular.
Point sample_point(const std::string& name, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point p{};
  if (name == "product-s2s2" || name == "conformal-s2s2") {
    p = {0.4 + (std::numbers::pi - 0.8) * u(rng), kTwoPi * u(rng), 0.4 + (std::numbers::pi - 0.8) * u(rng),
         kTwoPi * u(rng)};
  } else if (name == "polar-test") {
    p = {0.2 + 1.3 * u(rng), 2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0};
  } else if (name == "sphere4" || name == "euclidean" || name == "flat-ball") {
    for (double& c : p) c = 2.0 * u(rng) - 1.0;
  } else {
    for (double& c : p) c = kTwoPi * u(rng);
  }
  return p;
}

// A smooth random function on the torus, bounded by 0.4 in absolute value.
std::string random_factor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-0.15, 0.15), phase(0.0, kTwoPi);
  std::ostringstream os;
  os.precision(17);
  os << amp(rng) << "*sin(x1+" << phase(rng) << ")+" << amp(rng) << "*cos(x2+x3+" << phase(rng) << ")+"
     << amp(rng) << "*sin(x4-x1+" << phase(rng) << ")";
  return os.str();
}

double max_abs_diff(const Mat4& a, const Mat4& b) {
  double m = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

double max_abs(const Mat4& a) {
  double m = 0.0;
  for (const auto& row : a)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

SpectralOptions spectral_options(const Tolerances& tol, const json& cfg) {
  SpectralOptions o;
  o.eig_tol = tol.eig_tol;
  o.zero_tol = tol.zero_tol;
  o.bach_floor = tol.bach_floor;
  o.newton_tol = tol.newton_tol;
  o.max_iterations = opt<int>(cfg, "max_iterations", o.max_iterations);
  o.descent_steps = opt<int>(cfg, "descent_steps", o.descent_steps);
  o.newton_steps = opt<int>(cfg, "newton_steps", o.newton_steps);
  return o;
}

json node_fields(const ChartGrid& grid, const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& cols,
                 const std::vector<std::pair<std::string, const std::vector<double>*>>& vcols) {
  json f;
  std::array<std::vector<double>, kDim> x;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point p = grid.node(n);
    for (int a = 0; a < kDim; ++a) x[a].push_back(p[a]);
  }
  for (int a = 0; a < kDim; ++a) f["x" + std::to_string(a + 1)] = x[a];
  for (const auto& [name, v] : cols) f[name] = std::vector<double>(v->data(), v->data() + v->size());
  for (const auto& [name, v] : vcols) f[name] = *v;
  return f;
}

// ---------------------------------------------------------------------------

json run_curvature(const json& cfg, const Tolerances& tol) {
  const MetricChoice m = metric_from(cfg);
  if (!cfg.contains("at")) fail(ErrorCode::kConfigParse, "curvature needs 'at'");
  const ChartPoint p{point_from(cfg.at("at"), "at")};
  const std::string which = opt<std::string>(cfg, "bach", "both");
  if (which != "weyl" && which != "ricci" && which != "both")
    fail(ErrorCode::kConfigParse, "bach must be weyl, ricci or both");
  JetOptions jo;
  jo.pd_floor = tol.pd_floor;
  jo.fd_tol = tol.fd_tol;
  const MetricJet jet = jet_of_metric(m.field, p, 4, jo);
  const CurvatureBundle cb = curvature_bundle(jet);
  json r;
  r["metric"] = m.field.label();
  r["provenance"] = provenance_name(m.field.provenance());
  r["point"] = cb.point;
  r["g"] = cb.g;
  r["ginv"] = cb.ginv;
  r["christoffel"] = cb.gamma;
  r["riemann"] = flatten(cb.riemann);
  r["ricci"] = cb.ricci;
  r["scalar"] = cb.scalar;
  r["weyl_norm"] = tensor_norm(cb.weyl, cb.ginv);
  r["ricci_norm"] = tensor_norm(cb.ricci, cb.ginv);
  const double t = opt<double>(cfg, "t", 0.0);
  Mat4 bw{}, br{};
  if (which != "ricci") {
    bw = bach_weyl_form(jet).b;
    r["bach_weyl"] = bw;
  }
  if (which != "weyl") {
    br = bach_ricci_form(jet).b;
    r["bach_ricci"] = br;
  }
  const Mat4& b = which == "weyl" ? bw : br;
  const double bn = tensor_norm(b, cb.ginv);
  double trace = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) trace += cb.ginv[i][j] * b[i][j];
  r["bach_norm"] = bn;
  r["bach_trace"] = trace;
  r["t"] = t;
  r["scalar_bach"] = cb.scalar + t * std::sqrt(bn);
  if (which == "both") {
    const double agree = max_abs_diff(bw, br) / (1.0 + max_abs(br));
    const double tol_used = m.field.provenance() == Provenance::kFiniteDifference ? 1e-3 : tol.cross_tol;
    r["form_agreement"] = {{"relative", agree}, {"tol", tol_used}, {"pass", agree <= tol_used}};
  }
  return r;
}

json run_deform(const json& cfg, const Tolerances&) {
  const MetricChoice m = metric_from(cfg);
  const std::string fexpr = opt<std::string>(cfg, "f", "");
  if (fexpr.empty()) fail(ErrorCode::kConfigParse, "deform needs 'f'");
  const ScalarField f = make_scalar(fexpr, params_from(cfg.contains("f_params") ? cfg.at("f_params") : json()));
  const double k = opt<double>(cfg, "k", 1.0);
  const std::string report = opt<std::string>(cfg, "report", "curvature");
  const DeformationSpec spec{f, k, fexpr};
  json r;
  r["f"] = fexpr;
  r["k"] = k;
  r["report"] = report;
  if (report == "identity") {
    const ChartGrid grid = box_grid(m.field, cfg, 16);
    const auto [lhs, rhs] = scalar_integral_identity(m.field, spec, grid);
    r["integral_sbar"] = lhs;
    r["integral_rhs"] = rhs;
    r["relative"] = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    r["nodes"] = grid.size();
    return r;
  }
  if (!cfg.contains("at")) fail(ErrorCode::kConfigParse, "deform needs 'at' for this report");
  const ChartPoint p{point_from(cfg.at("at"), "at")};
  if (report == "curvature") {
    const DeformedCurvature dc = deformed_curvature_closed(m.field, spec, p);
    const PointCurvature direct = point_curvature(deform_metric(m.field, spec).taylor(p.coords));
    r["scalar_closed"] = dc.scalar_closed;
    r["scalar_direct"] = direct.scalar;
    r["ricci_closed"] = dc.ricci_closed;
    r["ricci_direct"] = direct.ricci;
    r["H"] = dc.H;
    r["F"] = dc.F;
    r["vol_ratio"] = dc.vol_ratio;
    r["inv_bar"] = dc.inv_bar;
    r["ricci_relative"] = max_abs_diff(dc.ricci_closed, direct.ricci) / (1.0 + max_abs(direct.ricci));
    r["scalar_relative"] = std::abs(dc.scalar_closed - direct.scalar) / (1.0 + std::abs(direct.scalar));
  } else if (report == "bach-error") {
    const Mat4 e = bach_error(m.field, spec, p);
    const MetricField gb = deform_metric(m.field, spec);
    r["bach_error"] = e;
    r["bach_error_norm_gbar"] = tensor_norm(e, inverse4(gb.value(p.coords)));
  } else {
    fail(ErrorCode::kConfigParse, "report must be curvature, bach-error or identity");
  }
  return r;
}

json run_conformal(const json& cfg, const Tolerances&) {
  const MetricChoice m = metric_from(cfg);
  const std::string uexpr = opt<std::string>(cfg, "factor", "");
  if (uexpr.empty()) fail(ErrorCode::kConfigParse, "conformal needs 'factor'");
  const Params fp = params_from(cfg.contains("factor_params") ? cfg.at("factor_params") : json());
  const ScalarField u = make_scalar(uexpr, fp);
  if (!cfg.contains("at")) fail(ErrorCode::kConfigParse, "conformal needs 'at'");
  const ChartPoint p{point_from(cfg.at("at"), "at")};
  const std::string check = opt<std::string>(cfg, "check", "bach");
  const std::string conv = opt<std::string>(cfg, "convention", "exponential");
  if (conv != "exponential" && conv != "power") fail(ErrorCode::kConfigParse, "convention must be exponential or power");
  const double t = opt<double>(cfg, "t", 0.0);
  json r;
  r["factor"] = uexpr;
  r["convention"] = conv;
  r["check"] = check;
  r["t"] = t;
  if (check == "laws") {
    const ConformalLaws L = conformal_curvature_laws(m.field, u, p);
    r["scalar_closed"] = L.scalar_closed;
    r["scalar_direct"] = L.scalar_direct;
    r["volume_ratio_closed"] = L.volume_ratio_closed;
    r["volume_ratio_direct"] = L.volume_ratio_direct;
    r["residual"] = L.residual;
  } else if (check == "covariance") {
    const ScalarField phi = make_scalar(opt<std::string>(cfg, "phi", "1"), fp);
    const CovarianceResidual c = covariance_residual(m.field, u, t, phi, p);
    r["operator_residual"] = c.operator_residual;
    r["potential_residual"] = c.potential_residual;
    r["scale"] = c.scale;
    r["relative"] = c.value() / c.scale;
  } else if (check == "bach") {
    const ConformalFactor c{u, conv == "power" ? ConformalConvention::kPower : ConformalConvention::kExponential};
    const BachCovarianceResidual b = bach_covariance_residual(m.field, c, p);
    r["component_abs"] = b.component_abs;
    r["component_rel"] = b.component_rel;
    r["norm_abs"] = b.norm_abs;
    r["norm_rel"] = b.norm_rel;
  } else {
    fail(ErrorCode::kConfigParse, "check must be laws, covariance or bach");
  }
  return r;
}

json trichotomy_json(const TrichotomyResult& tr) {
  return {{"mu", tr.eigen.mu},
          {"class", sign_class_name(tr.sign)},
          {"iterations", tr.eigen.iterations},
          {"residual", tr.eigen.residual},
          {"law_residual", tr.law_residual}};
}

json run_eigen(const json& cfg, const Tolerances& tol) {
  const MetricChoice m = metric_from(cfg);
  const double t = opt<double>(cfg, "t", 0.0);
  const ChartGrid grid = box_grid(m.field, cfg, 8);
  const SpectralOptions so = spectral_options(tol, cfg);
  const DiscreteOperator op = assemble_operator(m.field, grid, t);
  json r;
  r["t"] = t;
  r["grid"] = grid.resolution();
  r["min_bach_norm"] = op.min_bach_norm;
  r["constant_annihilation"] = op.constant_annihilation();
  r["self_adjointness"] = op.self_adjointness_residual();
  const TrichotomyResult tr = sign_trichotomy(op, so);
  r.update(trichotomy_json(tr));
  const auto [lo_it, hi_it] = std::minmax_element(op.potential.begin(), op.potential.end());
  const double lo = *lo_it, hi = *hi_it, lambda1 = flat_first_eigenvalue(grid);
  double mv = 0.0, mw = 0.0;
  for (std::size_t n = 0; n < op.size(); ++n) {
    mv += op.mass[n] * op.potential[n];
    mw += op.mass[n];
  }
  const double scale = 1.0 + std::abs(tr.eigen.mu);
  r["rayleigh"] = {{"min_potential", lo},
                   {"mean_potential", mv / mw},
                   {"max_potential", hi},
                   {"lambda1", lambda1},
                   {"pass", lo <= tr.eigen.mu + tol.eig_tol * scale && tr.eigen.mu <= hi + 6.0 * lambda1 + tol.eig_tol * scale},
                   {"mean_pass", tr.eigen.mu <= mv / mw + tol.eig_tol * scale}};
  if (opt<bool>(cfg, "fields", false))
    r["fields"] = node_fields(grid, {{"phi", &tr.eigen.phi}},
                              {{"potential", &op.potential}, {"normalized_potential", &tr.normalized_potential}});
  return r;
}

json normalization_json(const NormalizationReport& n) {
  return {{"K", n.K},
          {"el_residual", n.el_residual},
          {"deviation", n.deviation},
          {"continuum_deviation", n.continuum_deviation},
          {"integral_condition", n.integral_condition},
          {"initial_functional", n.initial_functional},
          {"final_functional", n.final_functional},
          {"monotone", n.monotone},
          {"descent_steps", n.descent_steps},
          {"newton_steps", n.newton_steps}};
}

json run_normalize(const json& cfg, const Tolerances& tol) {
  const MetricChoice m = metric_from(cfg);
  const double t = opt<double>(cfg, "t", 0.0);
  const ChartGrid grid = box_grid(m.field, cfg, 16);
  const SpectralOptions so = spectral_options(tol, cfg);
  const DiscreteOperator op = assemble_operator(m.field, grid, t);
  json r;
  r["t"] = t;
  r["grid"] = grid.resolution();
  r["min_bach_norm"] = op.min_bach_norm;
  const TrichotomyResult tr = sign_trichotomy(op, so);
  r["trichotomy"] = trichotomy_json(tr);
  const NormalizationReport n = minimize_and_normalize(op, so);
  r.update(normalization_json(n));
  r["norm_tol"] = tol.norm_tol;
  r["within_norm_tol"] = n.deviation <= tol.norm_tol;
  if (opt<bool>(cfg, "fields", false)) r["fields"] = node_fields(grid, {{"v", &n.v}}, {{"potential", &op.potential}});
  return r;
}

json phi_json(const PhiValues& p) {
  return {{"direct", p.direct},         {"formula", p.formula}, {"literal", p.literal},
          {"base", p.base},             {"min_bach_bar", p.min_bach_bar},
          {"nodes", p.nodes},           {"oracle_residual", p.oracle_residual()}};
}

json construction_json(const ConstructionReport& rep, bool with_samples) {
  json r;
  r["delta"] = rep.delta;
  r["k_chosen"] = rep.k_chosen;
  r["selection"] = {{"candidates", rep.selection.candidates}, {"min_bach", rep.selection.min_bach}};
  json balls = json::array();
  for (const BallReport& b : rep.balls)
    balls.push_back({{"center", b.ball.center}, {"radius", b.ball.radius}, {"phi", phi_json(b.phi)}});
  r["balls"] = balls;
  r["closed_base"] = rep.closed_base;
  r["base_integral"] = rep.base_integral;
  r["phi"] = rep.phi_value;
  r["phi_formula"] = rep.phi_formula;
  r["phi_literal"] = rep.phi_literal;
  r["phi_oracle_residual"] = rep.phi_oracle_residual;
  r["phi_box"] = rep.phi_box;
  r["min_bach_norm"] = rep.min_bach_norm;
  r["factorization_mismatch"] = rep.factorization_mismatch;
  json rows = json::array();
  for (const BoundSample& s : rep.bounds.rows) rows.push_back({{"k", s.k}, {"q", s.q}, {"rho_at_max", s.rho_at_max}});
  r["bounds"] = {{"rows", rows}, {"undeformed_q", rep.bounds.undeformed_q}, {"bounded", rep.bounds.bounded()}};
  if (rep.trichotomy) r["trichotomy"] = trichotomy_json(*rep.trichotomy);
  if (rep.normalization) r["normalization"] = normalization_json(*rep.normalization);
  r["success"] = rep.success;
  if (with_samples) {
    json s;
    std::vector<double> rho, psi, bach, scalar, fb;
    for (const NodeSample& n : rep.samples) {
      rho.push_back(n.rho);
      psi.push_back(n.psi);
      bach.push_back(n.bach_bar);
      scalar.push_back(n.scalar_bar);
      fb.push_back(n.scalar_bach);
    }
    s["rho"] = rho;
    s["psi"] = psi;
    s["bach_bar"] = bach;
    s["scalar_bar"] = scalar;
    s["scalar_bach"] = fb;
    r["fields"] = s;
  }
  return r;
}

ConstructionParams construction_params(const json& cfg, const Tolerances& tol) {
  ConstructionParams p;
  p.t = opt<double>(cfg, "t", p.t);
  p.balls = opt<int>(cfg, "balls", p.balls);
  p.radius = opt<double>(cfg, "radius", p.radius);
  p.nu = opt<double>(cfg, "nu", p.nu);
  p.k_candidates = opt<std::vector<double>>(cfg, "k_candidates", p.k_candidates);
  p.bound_ks = opt<std::vector<double>>(cfg, "bound_ks", p.bound_ks);
  p.ball_resolution = opt<std::array<int, kDim>>(cfg, "ball_resolution", p.ball_resolution);
  p.radial_panels = opt<int>(cfg, "radial_panels", p.radial_panels);
  p.box_resolution = opt<int>(cfg, "box_resolution", p.box_resolution);
  p.normalize = opt<bool>(cfg, "normalize", p.normalize);
  if (cfg.contains("centers"))
    for (const json& c : cfg.at("centers")) p.centers.push_back(point_from(c, "center"));
  p.spectral = spectral_options(tol, cfg);
  return p;
}

// The report survives a failed construction; it is attached before rethrowing.
struct FailureWithResult {
  Error error;
  json result;
};

json run_construct(const json& cfg, const Tolerances& tol) {
  const MetricChoice m = metric_from(cfg);
  const ConstructionParams p = construction_params(cfg, tol);
  const bool fields = opt<bool>(cfg, "fields", false);
  json params = {{"t", p.t},
                 {"balls", p.balls},
                 {"radius", p.radius},
                 {"nu", p.nu},
                 {"k_candidates", p.k_candidates},
                 {"ball_resolution", p.ball_resolution},
                 {"radial_panels", p.radial_panels},
                 {"box_resolution", p.box_resolution}};
  try {
    json r = construction_json(run_construction(m.field, p, fields), fields);
    r["params"] = params;
    return r;
  } catch (const ConstructionFailure& e) {
    json r = construction_json(e.report(), fields);
    r["params"] = params;
    throw FailureWithResult{Error(e.code(), e.what()), r};
  }
}

// ---------------------------------------------------------------------------

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

void push(std::vector<Check>& out, const std::string& suite, const std::string& name, double value, double tol) {
  out.push_back({suite, name, value, tol, value <= tol});
}

void suite_bach_equivalence(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances& tol) {
  const std::vector<std::pair<std::string, Params>> metrics = {{"sphere4", {}},
                                                               {"product-s2s2", {{"a", 1.0}, {"b", 2.0}}},
                                                               {"conformal-flat", {}},
                                                               {"perturbed-torus", {}},
                                                               {"conformal-s2s2", {}}};
  for (const auto& [name, params] : metrics) {
    const MetricField g = make_metric(name, params);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const MetricTaylor j = g.taylor(sample_point(name, rng));
      const Mat4 bw = bach_weyl_form(j), br = bach_ricci_form(j);
      worst = std::max(worst, max_abs_diff(bw, br) / (1.0 + max_abs(br)));
    }
    push(out, "bach-equivalence", name, worst, tol.cross_tol);
  }
}

void suite_covariance(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances& tol) {
  const std::vector<std::pair<std::string, Params>> metrics = {
      {"perturbed-torus", {}}, {"product-s2s2", {{"a", 1.0}, {"b", 2.0}}}, {"conformal-s2s2", {}}};
  for (const auto& [name, params] : metrics) {
    const MetricField g = make_metric(name, params);
    double comp = 0.0, norm = 0.0;
    for (int i = 0; i < 20; ++i) {
      const ConformalFactor c{make_scalar(random_factor(rng)), ConformalConvention::kExponential};
      const BachCovarianceResidual b = bach_covariance_residual(g, c, ChartPoint{sample_point(name, rng)});
      comp = std::max(comp, b.component_rel);
      norm = std::max(norm, b.norm_rel);
    }
    push(out, "covariance", name + "/bach-components", comp, tol.cross_tol);
    push(out, "covariance", name + "/bach-norm", norm, tol.cross_tol);
  }
  const MetricField g = make_metric("perturbed-torus");
  std::uniform_real_distribution<double> tdist(0.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ScalarField u = make_scalar("1+" + random_factor(rng));
    const ScalarField phi = make_scalar("1.2+" + random_factor(rng));
    const CovarianceResidual c = covariance_residual(g, u, tdist(rng), phi, ChartPoint{sample_point("perturbed-torus", rng)});
    worst = std::max(worst, c.value() / c.scale);
  }
  push(out, "covariance", "modified-laplacian", worst, tol.cross_tol);
}

void suite_einstein(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances& tol) {
  const std::vector<std::pair<std::string, Params>> metrics = {{"sphere4", {}}, {"product-s2s2", {{"a", 1.0}, {"b", 1.0}}}};
  for (const auto& [name, params] : metrics) {
    const MetricField g = make_metric(name, params);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) worst = std::max(worst, point_curvature(g.taylor(sample_point(name, rng))).bach_norm);
    push(out, "einstein", name, worst, 10.0 * tol.alg_tol);
  }
}

void suite_aubin(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances&) {
  const MetricField g = make_metric("perturbed-torus");
  const DeformationSpec spec{make_scalar("0.3*sin(x1+x2)"), 1.0, "f"};
  const MetricField gb = deform_metric(g, spec);
  double ric = 0.0, sc = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Point x = sample_point("perturbed-torus", rng);
    const DeformedCurvature dc = deformed_curvature_closed(g, spec, ChartPoint{x});
    const PointCurvature d = point_curvature(gb.taylor(x));
    ric = std::max(ric, max_abs_diff(dc.ricci_closed, d.ricci) / (1.0 + max_abs(d.ricci)));
    sc = std::max(sc, std::abs(dc.scalar_closed - d.scalar) / (1.0 + std::abs(d.scalar)));
  }
  push(out, "aubin", "ricci", ric, 1e-8);
  push(out, "aubin", "scalar", sc, 1e-8);
}

void suite_scaling(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances& tol) {
  const MetricField g = make_metric("perturbed-torus");
  std::uniform_real_distribution<double> kd(0.2, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ScalarField psi = make_scalar("1+" + random_factor(rng));
    worst = std::max(worst, conformal_error_scaling_check(g, psi, kd(rng), ChartPoint{sample_point("perturbed-torus", rng)}));
  }
  push(out, "scaling", "conformal-error", worst, tol.cross_tol);
}

void suite_identity(std::vector<Check>& out, const Tolerances&) {
  const MetricField g = make_metric("conformal-flat");
  ChartSpec cs;
  cs.extents = {kTwoPi, kTwoPi, kTwoPi, kTwoPi};
  cs.resolution = {16, 16, 16, 16};
  const auto [lhs, rhs] = scalar_integral_identity(g, {make_scalar("0.3*sin(x1)"), 1.0, "f"}, make_chart(cs));
  push(out, "identity", "scalar-integral", std::abs(lhs - rhs) / (1.0 + std::abs(lhs)), 1e-8);
}

void suite_conformal_integral(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances&) {
  const MetricField g = make_metric("perturbed-torus");
  ChartSpec cs;
  cs.extents = {kTwoPi, kTwoPi, kTwoPi, kTwoPi};
  cs.resolution = {16, 16, 16, 16};
  const auto [lhs, rhs] = conformal_integral_identity(g, make_scalar("1+" + random_factor(rng)), 0.5, make_chart(cs));
  push(out, "conformal-integral", "conformal-integral", std::abs(lhs - rhs) / (1.0 + std::abs(lhs)), 1e-8);
}

void suite_trichotomy(std::vector<Check>& out, std::mt19937_64& rng, const Tolerances& tol) {
  const MetricField g = make_metric("perturbed-torus");
  ChartSpec cs;
  cs.extents = {kTwoPi, kTwoPi, kTwoPi, kTwoPi};
  cs.resolution = {8, 8, 8, 8};
  const ChartGrid grid = make_chart(cs);
  SpectralOptions so;
  so.eig_tol = tol.eig_tol;
  so.zero_tol = tol.zero_tol;
  so.bach_floor = tol.bach_floor;
  for (double t : {0.0, 1.0}) {
    const SignClass base = sign_trichotomy(g, grid, t, so).sign;
    double mismatches = 0.0;
    for (int i = 0; i < 10; ++i) {
      const ConformalFactor c{make_scalar(random_factor(rng)), ConformalConvention::kExponential};
      if (sign_trichotomy(conformal_metric(g, c), grid, t, so).sign != base) mismatches += 1.0;
    }
    push(out, "trichotomy", std::string("class-invariance/t=") + (t == 0.0 ? "0/" : "1/") + sign_class_name(base),
         mismatches, 0.0);
  }
}

void suite_profile(std::vector<Check>& out) {
  const ProfileReport rep = check_profile(bump_profile(0.5 * max_feasible_delta()));
  for (const ProfileCheck& c : rep.checks) out.push_back({"profile", c.name, c.worst, 0.0, c.pass});
}

json run_verify(const json& cfg, const Tolerances& tol) {
  const std::string suite = opt<std::string>(cfg, "suite", "all");
  const auto seed = opt<std::uint64_t>(cfg, "seed", 1);
  std::mt19937_64 rng(seed);
  std::vector<Check> checks;
  const bool all = suite == "all";
  bool known = all;
  auto want = [&](const char* s) {
    const bool w = all || suite == s;
    known = known || w;
    return w;
  };
  if (want("bach-equivalence")) suite_bach_equivalence(checks, rng, tol);
  if (want("covariance")) suite_covariance(checks, rng, tol);
  if (want("einstein")) suite_einstein(checks, rng, tol);
  if (want("aubin")) suite_aubin(checks, rng, tol);
  if (want("scaling")) suite_scaling(checks, rng, tol);
  if (want("identity")) suite_identity(checks, tol);
  if (want("conformal-integral")) suite_conformal_integral(checks, rng, tol);
  if (want("trichotomy")) suite_trichotomy(checks, rng, tol);
  if (want("profile")) suite_profile(checks);
  if (!known) fail(ErrorCode::kConfigParse, "unknown suite '" + suite + "'");
  json r;
  r["suite"] = suite;
  r["seed"] = seed;
  json list = json::array();
  int failed = 0;
  for (const Check& c : checks) {
    list.push_back({{"suite", c.suite}, {"name", c.name}, {"value", c.value}, {"tol", c.suite == "profile" ? json() : json(c.tol)}, {"pass", c.pass}});
    if (!c.pass) ++failed;
  }
  r["checks"] = list;
  r["failed"] = failed;
  r["pass"] = failed == 0;
  if (failed > 0) throw FailureWithResult{Error(ErrorCode::kInternal, std::to_string(failed) + " verification checks failed"), r};
  return r;
}

json run_catalog() {
  json list = json::array();
  for (const CatalogEntry& e : metric_catalog())
    list.push_back({{"name", e.name}, {"description", e.description}, {"defaults", e.defaults}});
  return {{"metrics", list}};
}

}  // namespace

bool is_hypothesis_failure(int status) {
  switch (static_cast<ErrorCode>(status)) {
    case ErrorCode::kBachVanishes:
    case ErrorCode::kHypothesisFailed:
    case ErrorCode::kPhiNotNegative:
    case ErrorCode::kBachDegenerate:
    case ErrorCode::kAllCandidatesDegenerate:
    case ErrorCode::kInfeasibleDelta:
      return true;
    default:
      return false;
  }
}

Outcome run(const std::string& command, const json& config) {
  Outcome out;
  out.doc["schema"] = std::string("bachgeom/") + command + "/v" + kSchemaVersion;
  out.doc["command"] = command;
  out.doc["conventions"] = conventions();
  auto set_error = [&](ErrorCode code, const std::string& msg) {
    out.status = static_cast<int>(code);
    out.doc["status"] = "error";
    out.doc["error"] = {{"code", out.status}, {"name", error_code_name(code)}, {"message", msg}};
  };
  try {
    if (!config.is_object()) fail(ErrorCode::kConfigParse, "config must be a JSON object");
    const Tolerances tol = tolerances_from(config);
    out.doc["tolerances"] = tolerances_json(tol);
    if (config.contains("seed")) out.doc["seed"] = config.at("seed");
    json result;
    if (command == "curvature") result = run_curvature(config, tol);
    else if (command == "deform") result = run_deform(config, tol);
    else if (command == "conformal") result = run_conformal(config, tol);
    else if (command == "eigen") result = run_eigen(config, tol);
    else if (command == "normalize") result = run_normalize(config, tol);
    else if (command == "construct") result = run_construct(config, tol);
    else if (command == "verify") result = run_verify(config, tol);
    else if (command == "catalog") result = run_catalog();
    else fail(ErrorCode::kConfigParse, "unknown command '" + command + "'");
    if (config.contains("metric")) out.doc["metric"] = config.at("metric");
    out.doc["status"] = "ok";
    out.doc["result"] = result;
  } catch (const FailureWithResult& f) {
    out.doc["result"] = f.result;
    set_error(f.error.code(), f.error.what());
  } catch (const Error& e) {
    set_error(e.code(), e.what());
  } catch (const json::exception& e) {
    set_error(ErrorCode::kConfigParse, e.what());
  } catch (const std::exception& e) {
    set_error(ErrorCode::kInternal, e.what());
  }
  return out;
}

}  // namespace bachgeom::cmd
