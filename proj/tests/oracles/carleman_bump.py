"""Cubic-regime Carleman sides for the bare bump f(t,x) = T(t) W(|x|), n = 1,
A = I, R = 1, r0 = 1, by 1-D high-precision quadrature.

For f real the conjugated operator splits as
  Re Pf = T (W'' - 4 b x W' + (4 b^2 x^2 - 2 b) W)
  Im Pf = W (T' - b p'(t) T)
so every double integral factors into products of 1-D integrals.
Derivatives come from mpmath numerical differentiation of the closed forms.
"""
import mpmath as mp

mp.mp.dps = 30

L = mp.mpf(8)
EDGE = mp.mpf("7.5")           # outer support radius
T_LO, T_HI, T_LAYER = mp.mpf(1) / 16, mp.mpf(15) / 16, mp.mpf(1) / 8
R0, LAYER = mp.mpf(1), mp.mpf(1)
A0, A1, B0, B1, H = mp.mpf("0.13"), mp.mpf("0.25"), mp.mpf("0.75"), mp.mpf("0.87"), 3


def edge(s):
    if s <= 0:
        return mp.mpf(0)
    if s >= 1:
        return mp.mpf(1)
    a, b = mp.exp(-1 / s), mp.exp(-1 / (1 - s))
    return a / (a + b)


def window(s, lo, hi, w):
    return edge((s - lo) / w) * edge((hi - s) / w)


def smooth5(s):
    s = min(max(s, 0), 1)
    return s**6 * (462 - 1980 * s + 3465 * s**2 - 3080 * s**3 + 1386 * s**4 - 252 * s**5)


def profile(t):
    if t <= A0 or t >= B1:
        return mp.mpf(0)
    if t < A1:
        return H * smooth5((t - A0) / (A1 - A0))
    if t > B0:
        return H * smooth5((B1 - t) / (B1 - B0))
    return mp.mpf(H)


def T(t):
    return window(t, T_LO, T_HI, T_LAYER)


def W(x):
    return window(abs(x), R0, EDGE, LAYER)


def d(f, x, k):
    return mp.diff(f, x, k)


def main():
    # sup |phi''| on the rising ramp (the falling ramp mirrors it)
    w = A1 - A0
    phi2 = lambda s: H * mp.diff(smooth5, s, 2) / w**2
    crit = [mp.findroot(lambda s: mp.diff(smooth5, s, 3), s0) for s0 in (0.2, 0.8)]
    phi2_sup = max(abs(phi2(s)) for s in crit)
    beta = mp.sqrt(phi2_sup)                 # beta_1 with lambda = r0 = R = 1, C1 = 0

    xb = [R0, R0 + LAYER, EDGE - LAYER, EDGE]
    tb = [T_LO, T_LO + T_LAYER, A0, A1, B0, B1, T_HI - T_LAYER, T_HI]
    tb = sorted(set(tb))
    # both signs of x contribute equally
    ix = lambda g: 2 * mp.quad(g, xb)
    it = lambda g: mp.quad(g, tb)

    T2 = it(lambda t: T(t) ** 2)
    W2 = ix(lambda x: W(x) ** 2)
    Wx2 = ix(lambda x: d(W, x, 1) ** 2)
    xW2 = ix(lambda x: x**2 * W(x) ** 2)
    re = ix(lambda x: (d(W, x, 2) - 4 * beta * x * d(W, x, 1) + (4 * beta**2 * x**2 - 2 * beta) * W(x)) ** 2)
    im = it(lambda t: (d(T, t, 1) - beta * d(profile, t, 1) * T(t)) ** 2)

    lhs = beta * T2 * Wx2 + beta**3 * T2 * xW2
    rhs = T2 * re + W2 * im
    print("phi2_sup", mp.nstr(phi2_sup, 17))
    print("beta1", mp.nstr(beta, 17))
    print("lhs", mp.nstr(lhs, 17))
    print("rhs", mp.nstr(rhs, 17))
    print("slack", mp.nstr(rhs / lhs, 17))


if __name__ == "__main__":
    main()
