"""One-time symbolic differentiation oracle.

Regenerates the sign-sensitive constants frozen into the test suite: the
sectional factors of the model charts under the implemented curvature
component formula, the relative sign of the two candidate Ricci
contractions, the sign of the quadratic connection term that makes the
formula tensorial, and the leading coefficient of the scaled pair-product
flow.  Run it with ``python tools/pin_constants.py``; it prints a table and
writes nothing.  It is a development desk tool, not part of the library.
"""

import itertools

import numpy as np
import sympy as sp


def christoffel(g, coords):
    n = len(coords)
    ginv = g.inv()
    gam = [[[sp.S(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                e = sp.S(0)
                for l in range(n):
                    e += ginv[i, l] * (sp.diff(g[l, j], coords[k])
                                       + sp.diff(g[l, k], coords[j])
                                       - sp.diff(g[j, k], coords[l])) / 2
                gam[i][j][k] = sp.simplify(e)
    return gam


def curvature(g, coords, quad_sign=-1):
    """Fully lowered curvature with the implemented bracket; ``quad_sign``
    selects the sign of the connection-quadratic term."""
    n = len(coords)
    gam = christoffel(g, coords)
    R = {}
    for i, j, k, l in itertools.product(range(n), repeat=4):
        br = (sp.diff(g[i, k], coords[j], coords[l])
              + sp.diff(g[j, l], coords[i], coords[k])
              - sp.diff(g[j, k], coords[i], coords[l])
              - sp.diff(g[i, l], coords[j], coords[k])) / 2
        quad = sp.S(0)
        for m in range(n):
            for p in range(n):
                quad += g[m, p] * (gam[m][j][k] * gam[p][i][l]
                                   - gam[m][j][l] * gam[p][i][k])
        R[(i, j, k, l)] = sp.simplify(br + quad_sign * quad)
    return R


def conformal_ball(n, sign):
    xs = sp.symbols(f"x0:{n}", real=True)
    r2 = sum(x * x for x in xs)
    return sp.eye(n) * (4 / (1 + sign * r2) ** 2), xs


def main():
    print("tensoriality of the quadratic-term sign (flat metric, polar-type chart):")
    r, t = sp.symbols("r t", positive=True)
    gpol = sp.Matrix([[1, 0], [0, r ** 2]])
    for qs in (-1, +1):
        val = curvature(gpol, (r, t), quad_sign=qs)[(0, 1, 0, 1)]
        print(f"  quad_sign={qs:+d}: R_1212 = {sp.simplify(val)}"
              f"  ({'tensorial' if sp.simplify(val) == 0 else 'NOT tensorial'})")

    for label, sign in (("sphere-stereographic", +1), ("hyperbolic-poincare", -1)):
        g, xs = conformal_ball(2, sign)
        R = curvature(g, xs)
        at0 = {x: 0 for x in xs}
        kappa = sp.simplify(R[(0, 1, 0, 1)].subs(at0) / g.subs(at0).det())
        print(f"{label}: sectional factor = {kappa}")

    print("dimension-3 sphere chart: proportionality to the pair product and "
          "both Ricci contractions:")
    g, xs = conformal_ball(3, +1)
    R = curvature(g, xs)
    at0 = {x: 0 for x in xs}
    g0 = np.array(g.subs(at0), dtype=float)
    ginv0 = np.linalg.inv(g0)
    Rm = np.array([[[[float(R[(i, j, k, l)].subs(at0)) for l in range(3)]
                     for k in range(3)] for j in range(3)] for i in range(3)])
    G0 = np.einsum("ik,jl->ijkl", g0, g0) - np.einsum("il,jk->ijkl", g0, g0)
    lam = Rm[0, 1, 0, 1] / G0[0, 1, 0, 1]
    print(f"  factor lam with Riem = lam G: {lam:+.6f}"
          f"  (max deviation {np.abs(Rm - lam * G0).max():.1e})")
    ric_pair = np.einsum("jl,ijkl->ik", ginv0, Rm)
    ric_alt = np.einsum("il,ijkl->jk", ginv0, Rm)
    print(f"  pair trace g^jl R_ijkl      = {ric_pair[0, 0] / g0[0, 0]:+.3f} g")
    print(f"  alternative g^il R_ijkl     = {ric_alt[0, 0] / g0[0, 0]:+.3f} g"
          "  (opposite sign; the pair trace is the one under which the"
          " dimension-3 decomposition and the trace-free conformal tensor hold)")

    print("scaled-flow leading coefficient (conformally flat 4-metric):")
    n = 4
    ys = sp.symbols(f"y0:{n}", real=True)
    phi = 1 + ys[0] * ys[1] / 3 + ys[2] ** 2 / 5
    g4 = sp.exp(2 * phi) * sp.eye(n)
    R4 = curvature(g4, ys)
    pt = {y: v for y, v in zip(ys, (0.11, -0.07, 0.13, 0.05))}
    g0 = np.array(g4.subs(pt), dtype=float)
    ginv0 = np.linalg.inv(g0)
    Rm = np.array([[[[float(R4[(i, j, k, l)].subs(pt)) for l in range(n)]
                     for k in range(n)] for j in range(n)] for i in range(n)])
    S = np.einsum("jl,ijkl->ik", ginv0, Rm)
    Rsc = np.einsum("ik,ik->", ginv0, S)
    G4 = np.einsum("ik,jl->ijkl", g0, g0) - np.einsum("il,jk->ijkl", g0, g0)
    vel = -2.0 * S

    def kn(a, b):
        return (np.einsum("ik,jl->ijkl", a, b) + np.einsum("jl,ik->ijkl", a, b)
                - np.einsum("il,jk->ijkl", a, b) - np.einsum("jk,il->ijkl", a, b))

    dG = kn(vel, g0)
    for alpha in (2 * (n - 2), -2 * (n - 2)):
        rhs = alpha * Rm + (1.0 / (n - 1)) * (-2.0 * Rsc) * G4
        print(f"  alpha = {alpha:+d}: max residual {np.abs(dG - rhs).max():.2e}")


if __name__ == "__main__":
    main()
