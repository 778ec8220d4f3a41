#pragma once

// Named metrics with closed-form jets, and user metrics built from expressions.

#include <map>
#include <string>
#include <vector>

#include "bachgeom/expr.hpp"
#include "bachgeom/fields.hpp"

namespace bachgeom {

using Params = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  std::string description;
  Params defaults;
};

const std::vector<CatalogEntry>& metric_catalog();

/// Catalog metric by name; unknown parameters are rejected, missing ones take defaults.
MetricField make_metric(const std::string& name, const Params& params = {});

/// Metric whose upper-triangle components g11 g12 g13 g14 g22 g23 g24 g33 g34 g44 are expressions.
struct UserMetricSpec {
  std::string label = "user";
  std::array<std::string, 10> components{};
  Params params;
  Provenance provenance = Provenance::kDualNumber;
  ChartDomain domain = ChartDomain::whole_space();
  double fd_step = 0.05;
};

MetricField make_user_metric(const UserMetricSpec& spec);

/// Scalar field from an expression in x1..x4.
ScalarField make_scalar(const std::string& expression, const Params& params = {});

}  // namespace bachgeom
