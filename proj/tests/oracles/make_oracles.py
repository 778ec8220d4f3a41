#!/usr/bin/env python3
"""Independent reference values, written to frozen_oracles.hpp.

Everything here is computed with sympy/scipy from the closed-form metrics and
shares no code with the library.  Rerun after changing a definition:

    python3 tests/oracles/make_oracles.py > tests/oracles/frozen_oracles.hpp
"""

import itertools

import sympy as sp
from scipy import integrate, optimize, special

X = sp.symbols("x1:5", real=True)
N = 4


def geometry(g):
    """Christoffels, Riemann, Ricci and scalar for a sympy metric matrix."""
    gi = sp.simplify(g.inv())
    gam = [[[sp.simplify(sum(gi[a, e] * (sp.diff(g[e, b], X[c]) + sp.diff(g[e, c], X[b]) - sp.diff(g[b, c], X[e]))
                             for e in range(N)) / 2)
             for c in range(N)] for b in range(N)] for a in range(N)]
    # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    rup = {}
    for a, b, c, d in itertools.product(range(N), repeat=4):
        rup[a, b, c, d] = (sp.diff(gam[a][d][b], X[c]) - sp.diff(gam[a][c][b], X[d])
                           + sum(gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b] for e in range(N)))
    riem = {(a, b, c, d): sp.simplify(sum(g[a, e] * rup[e, b, c, d] for e in range(N)))
            for a, b, c, d in itertools.product(range(N), repeat=4)}
    ric = sp.Matrix(N, N, lambda b, d: sp.simplify(sum(rup[a, b, a, d] for a in range(N))))
    scal = sp.simplify(sum(gi[b, d] * ric[b, d] for b in range(N) for d in range(N)))
    return gi, gam, riem, ric, scal


def bach(g):
    """B_ab = P^cd W_acbd + Lap P_ab - nabla^c nabla_a P_bc."""
    gi, gam, riem, ric, scal = geometry(g)
    P = sp.Matrix(N, N, lambda a, b: (ric[a, b] - scal * g[a, b] / 6) / 2)

    def weyl(a, b, c, d):
        return riem[a, b, c, d] - (P[a, c] * g[b, d] + P[b, d] * g[a, c] - P[a, d] * g[b, c] - P[b, c] * g[a, d])

    # nabla_c P_ab
    dP = {(c, a, b): sp.diff(P[a, b], X[c]) - sum(gam[e][c][a] * P[e, b] + gam[e][c][b] * P[a, e] for e in range(N))
          for a, b, c in itertools.product(range(N), repeat=3)}
    # nabla_d nabla_c P_ab
    def ddP(d, c, a, b):
        return (sp.diff(dP[c, a, b], X[d])
                - sum(gam[e][d][c] * dP[e, a, b] + gam[e][d][a] * dP[c, e, b] + gam[e][d][b] * dP[c, a, e]
                      for e in range(N)))

    Pu = gi * P * gi
    B = sp.zeros(N, N)
    for a, b in itertools.product(range(N), repeat=2):
        term = sum(Pu[c, d] * weyl(a, c, b, d) for c in range(N) for d in range(N))
        term += sum(gi[c, d] * ddP(c, d, a, b) for c in range(N) for d in range(N))
        term -= sum(gi[c, d] * ddP(d, a, b, c) for c in range(N) for d in range(N))
        B[a, b] = term
    return B, gi


def emit_matrix(name, m):
    rows = ",\n    ".join("{" + ", ".join(f"{float(v):.17g}" for v in row) + "}" for row in m)
    print(f"inline constexpr double {name}[4][4] = {{\n    {rows}}};")


def product_s2s2_table():
    a, b = 1, 2
    g = sp.diag(a**2, a**2 * sp.sin(X[0]) ** 2, b**2, b**2 * sp.sin(X[2]) ** 2)
    B, gi = bach(g)
    points = [(1.0, 0.3, 2.0, 1.1), (0.7, 4.0, 1.3, 5.5), (2.2, 1.7, 0.9, 3.0)]
    print("// S2(1) x S2(2) in (theta1, phi1, theta2, phi2): Bach tensor, lower indices.")
    print(f"inline constexpr double kS2S2Points[{len(points)}][4] = {{"
          + ", ".join("{" + ", ".join(repr(c) for c in p) + "}" for p in points) + "};")
    norms = []
    for n, p in enumerate(points):
        sub = dict(zip(X, p))
        Bv = B.subs(sub).evalf(30)
        giv = gi.subs(sub).evalf(30)
        emit_matrix(f"kS2S2Bach{n}", Bv.tolist())
        norms.append(sp.sqrt(sum((giv * Bv * giv)[i, j] * Bv[i, j] for i in range(N) for j in range(N))))
    print("inline constexpr double kS2S2BachNorm[] = {" + ", ".join(f"{float(v):.17g}" for v in norms) + "};")


def aubin_bach_error():
    f = sp.Rational(3, 10) * sp.sin(X[0] + X[1])
    df = [sp.diff(f, x) for x in X]
    g = sp.Matrix(N, N, lambda i, j: (1 if i == j else 0) + df[i] * df[j])
    B, _ = bach(g)
    Bv = B.subs(dict(zip(X, (sp.pi / 2, 0, 0, 0)))).evalf(30)
    print("// Euclidean base, f = 0.3 sin(x1 + x2), k = 1: B(gbar) - B(delta) at (pi/2, 0, 0, 0).")
    emit_matrix("kAubinBachError", Bv.tolist())
    # f of a single linear form gives a flat gbar, so also tabulate a genuinely curved case.
    f = sp.Rational(3, 10) * sp.sin(X[0]) * sp.cos(X[1])
    df = [sp.diff(f, x) for x in X]
    g = sp.Matrix(N, N, lambda i, j: (1 if i == j else 0) + df[i] * df[j])
    B, _ = bach(g)
    Bv = B.subs(dict(zip(X, (sp.Rational(2, 5), sp.Rational(7, 10), 0, 0)))).evalf(30)
    print("// Euclidean base, f = 0.3 sin(x1) cos(x2), k = 1: B(gbar) at (0.4, 0.7, 0, 0).")
    emit_matrix("kAubinBachErrorCurved", Bv.tolist())


def flat_ball_phi():
    """Integral of the scalar curvature of the normalized double deformation of a flat ball."""
    r, k = 0.5, 50.0
    s = sp.symbols("s")
    ramp = sp.integrate(s**6 * (1 - s) ** 4, (s, 0, s)) / sp.beta(7, 5)
    slope = sp.lambdify(s, sp.diff(ramp.subs(s, s**2), s))
    lo, hi = 0.25 ** (1 / 3), 0.75 ** (1 / 3)
    m = optimize.minimize_scalar(slope, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}).fun
    m = min(m, slope(lo), slope(hi))
    delta = (1 - 1 / m) / 2
    assert abs(float(ramp.subs(s, 0.37)) - special.betainc(7, 5, 0.37)) < 1e-14

    rho = sp.symbols("rho", positive=True)
    psi = delta + (1 - delta) * ramp.subs(s, (rho / r) ** 2)
    p1 = sp.diff(psi, rho)
    q = 1 + k**2 * p1**2 / psi
    # gtilde = A drho^2 + F^2 g_{S^3}
    A = psi * sp.sqrt(q)
    F = rho * sp.sqrt(psi / sp.sqrt(q))
    dF = sp.diff(F, rho) / sp.sqrt(A)
    ddF = sp.diff(dF, rho) / sp.sqrt(A)
    # S F^3 dV = 2 pi^2 (6 F (1 - F_s^2) - 6 F^2 F_ss) ds, ds = sqrt(A) drho
    integrand = sp.lambdify(rho, 2 * sp.pi**2 * 6 * (F * (1 - dF**2) - F**2 * ddF) * sp.sqrt(A), "math")
    edges = [r * e for e in (0, 0.1, 0.2, 0.3, 0.4, 0.45, 0.48, 0.49, 0.495, 0.499, 1.0)]
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        v, err = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-14, limit=500)
        total += v
    print("// Flat ball r = 0.5, k = 50, delta = delta_max / 2: Phi over the ball (Bach vanishes).")
    print(f"inline constexpr double kFlatBallDeltaMax = {1 - 1 / m:.17g};")
    print(f"inline constexpr double kFlatBallPhi = {total:.17g};")


if __name__ == "__main__":
    print("#pragma once")
    print("// Generated by make_oracles.py; do not edit.")
    print()
    print("namespace oracle {")
    print()
    product_s2s2_table()
    print()
    aubin_bach_error()
    print()
    flat_ball_phi()
    print()
    print("}  // namespace oracle")
