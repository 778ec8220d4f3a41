// Times pointwise Bach evaluation on a catalog metric.

#include <chrono>
#include <cstdio>

#include "bachgeom/catalog.hpp"
#include "bachgeom/curvature.hpp"

using namespace bachgeom;

int main() {
  const MetricField g = make_metric("perturbed-torus");
  const int reps = 2000;
  double sink = 0.0;
  auto t0 = std::chrono::steady_clock::now();
  for (int n = 0; n < reps; ++n) {
    const Point p{0.1 + 1e-3 * n, 0.2, 0.3, 0.4};
    sink += point_curvature(g.taylor(p)).bach_norm;
  }
  auto t1 = std::chrono::steady_clock::now();
  for (int n = 0; n < 200; ++n) {
    const Point p{0.1 + 1e-3 * n, 0.2, 0.3, 0.4};
    sink += bach_weyl_form(g.taylor(p))[0][0];
  }
  auto t2 = std::chrono::steady_clock::now();
  const double us1 = std::chrono::duration<double, std::micro>(t1 - t0).count() / reps;
  const double us2 = std::chrono::duration<double, std::micro>(t2 - t1).count() / 200;
  std::printf("ricci-form point: %.1f us, weyl-form point: %.1f us (sink %g)\n", us1, us2, sink);
  const Point p{0.7, 1.1, 2.3, 0.4};
  const Mat4 a = bach_ricci_form(g.taylor(p)), b = bach_weyl_form(g.taylor(p));
  for (int i = 0; i < 4; ++i)
    std::printf("%+.10e %+.10e %+.10e %+.10e | %+.10e %+.10e %+.10e %+.10e\n", a[i][0], a[i][1], a[i][2], a[i][3],
                b[i][0], b[i][1], b[i][2], b[i][3]);
  return 0;
}
