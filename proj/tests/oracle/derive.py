"""Independent reference values for the C++ test suites (mpmath / numpy / scipy, no shared code).

Run: python3 tests/oracle/derive.py
"""
import itertools
import math

import mpmath as mp
import numpy as np
from scipy import integrate

mp.mp.dps = 20


def mollifier():
    # psi = 1 on r <= 1/2, linear to 0 at rho, integral 1
    def integral(rho):
        a = mp.mpf(1) / 2
        ramp = mp.quad(lambda r: (rho - r) / (rho - a) * 2 * mp.pi * r, [a, rho])
        return mp.pi * a**2 + ramp

    rho = mp.findroot(lambda r: integral(r) - 1, 0.62)
    a = mp.mpf(1) / 2

    def psi(r):
        if r <= a:
            return mp.mpf(1)
        if r >= rho:
            return mp.mpf(0)
        return (rho - r) / (rho - a)

    l2 = mp.quad(lambda r: psi(r) ** 2 * 2 * mp.pi * r, [0, a, rho])
    return rho, psi, l2


def psi_hat(psi, rho, k):
    # radial transform: 2 pi int psi(r) J0(2 pi k r) r dr
    return mp.quad(lambda r: psi(r) * mp.besselj(0, 2 * mp.pi * k * r) * 2 * mp.pi * r, [0, 0.5, rho])


def autocorrelation(rho, d):
    # int psi(y) psi(y - d e1) dy in plain cartesian coordinates, float64
    rho = float(rho)

    def psi(r):
        return 1.0 if r <= 0.5 else max(0.0, (rho - r) / (rho - 0.5))

    f = lambda y, x: psi(math.hypot(x, y)) * psi(math.hypot(x - d, y))
    lo, hi = max(-rho, d - rho), min(rho, d + rho)
    val, _ = integrate.dblquad(f, lo, hi, lambda x: -rho, lambda x: rho, epsabs=1e-11, epsrel=1e-11)
    return val


def unit_cell_self_energy(u):
    # int int over [0,1]^2 x [0,1]^2 |x - y|^-u = int_{[-1,1]^2} (1-|a|)(1-|b|) |z|^-u dz, polar in the quarter
    def radial(th):
        c, s = math.cos(th), math.sin(th)
        rmax = 1 / max(c, s)
        return integrate.quad(lambda r: 4 * (1 - r * c) * (1 - r * s) * r ** (1 - u), 0, rmax, epsabs=1e-13)[0]

    return integrate.quad(radial, 0, math.pi / 2, points=[math.pi / 4], epsabs=1e-13)[0]


def frostman(points, masses, s, top, bottom):
    best = 0.0
    for lvl in range(top, bottom + 1):
        side = 2.0**-lvl
        bins = {}
        for (x, y), m in zip(points, masses):
            key = (math.floor(x / side), math.floor(y / side))
            bins[key] = bins.get(key, 0.0) + m
        best = max(best, max(bins.values()) / side**s)
    return best


def katz_tao_balls(P, s, delta):
    P = np.asarray(P)
    best = 0.0
    r = delta
    diam = np.max(np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2))
    while True:
        d = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
        counts = (d <= r).sum(axis=1)
        best = max(best, counts.max() * (delta / r) ** s)
        if r > diam:
            break
        r *= 2
    return best


def main():
    rho, psi, l2 = mollifier()
    print("rho", mp.nstr(rho, 17))
    print("l2", mp.nstr(l2, 17))
    for k in [0.25, 0.5, 1, 2, 3.7]:
        print("psi_hat", k, mp.nstr(psi_hat(psi, rho, k), 15))
    for d in [0.0, 0.3, 0.8]:
        print("Phi", d, "%.12g" % autocorrelation(rho, d))
    for u in [0.5, 1.0, 1.5]:
        print("c(u)", u, "%.15g" % unit_cell_self_energy(u))

    # lattice measure delta = 2^-8, s = 1/2
    xs = [k / 16 for k in range(-16, 17)]
    pts = [(x, x * x) for x in xs]
    ms = [1 / len(xs)] * len(xs)
    print("lattice atoms", len(xs))
    print("lattice frostman", frostman(pts, ms, 0.5, 0, 8))
    print("lattice closed ball r=1/16 at origin", sum(1 for x, y in pts if x * x + y * y <= (1 / 16) ** 2))

    # arc delta = 2^-8
    xs = [k / 256 for k in range(-256, 257)]
    pts = [(x, x * x) for x in xs]
    ms = [1 / len(xs)] * len(xs)
    print("arc frostman", frostman(pts, ms, 1.0, 0, 8))

    # cantor base 3 digits {0,2} m = 4
    xs = sorted(sum(d * 3.0 ** -(i + 1) for i, d in enumerate(ds)) for ds in itertools.product([0, 2], repeat=4))
    P = [(x, x * x) for x in xs]
    print("cantor3 katz_tao", katz_tao_balls(P, math.log(2) / math.log(3), 3.0**-4))

    # lattice x in (delta^s Z) cap [-1,1] on the parabola, delta = 2^-10, at scale delta^s and at delta
    for s_ in [0.3, 0.5, 0.8]:
        h = (2.0**-10) ** s_
        K = int(math.floor(1 / h + 1e-9))
        P = [(k * h, (k * h) ** 2) for k in range(-K, K + 1)]
        print("lattice katz_tao", s_, "scale delta^s", katz_tao_balls(P, s_, h), "scale delta", katz_tao_balls(P, s_, 2.0**-10))

    # katz-tao of a segment net: spacing 1.5 delta, delta = 2^-6, s = 1
    delta = 2.0**-6
    P = [(1.5 * delta * k, 0.0) for k in range(int(1 / (1.5 * delta)) + 1)]
    print("segment net katz_tao s=1", katz_tao_balls(P, 1.0, delta))
    # spacing delta (1 + 2^-20), delta = 2^-10, s = 1/2, single radius r = 1
    delta = 2.0**-10
    sp = delta * (1 + 2.0**-20)
    n = int(1 / sp) + 1
    x = np.array([sp * k for k in range(n)])
    best = max(int(((np.abs(x - c)) <= 1.0).sum()) for c in x)
    print("segment net katz_tao ratio at r=1", best * delta**0.5)

    # discrete riesz energy, uniform on delta^-1 collinear squares, s = 1/2
    for lvl in [4, 6, 8]:
        d = 2.0**-lvl
        N = 2**lvl
        c = (np.arange(N) + 0.5) * d
        D = np.abs(c[:, None] - c[None, :])
        np.fill_diagonal(D, np.inf)
        print("riesz line", lvl, 1 + (D**-0.5).sum() / N**2)

    # line metric between y = 0 and y = x
    def proj(a):
        v = np.array([1.0, a]) / math.hypot(1, a)
        return np.outer(v, v)

    print("line metric diag", np.linalg.norm(proj(0) - proj(1), 2))

    # fit of delta^-1 log(1/delta) over delta = 2^-4 .. 2^-10
    ks = np.arange(4, 11)
    y = np.log2(2.0**ks * np.log(2.0**ks))
    print("fit slope", np.polyfit(ks, y, 1)[0])

    # count vs energy for a single point: lhs 1, rhs delta^2 ||psi_{4 delta}||^2 = l2 / 16
    print("single point rhs", mp.nstr(l2 / 16, 15))


if __name__ == "__main__":
    main()
