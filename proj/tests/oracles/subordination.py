"""Subordination integral I(r) = int_{l0}^inf exp(l r - l^q/(q k^q)) l^{(q-2)/2} dl
against exp(k^p r^p / p), by arbitrary-precision quadrature."""
import mpmath as mp

mp.mp.dps = 40

P = mp.mpf("1.5")
Q = P / (P - 1)
KAPPA = mp.mpf(10)
L0 = mp.mpf(1)


def log_ratio(r, l0=L0):
    f = lambda l: mp.exp(l * r - l**Q / (Q * KAPPA**Q)) * l ** ((Q - 2) / 2)
    # peak of the integrand splits the range
    g1 = lambda l: r - l ** (Q - 1) / KAPPA**Q + (Q - 2) / (2 * l)
    peak = mp.findroot(g1, (mp.mpf("1e-6"), 10 * KAPPA ** (Q / (Q - 1)) * (1 + r) ** 2), solver="bisect")
    pts = [l0] + ([peak] if peak > l0 else []) + [peak * 4 + 100, mp.inf]
    return mp.log(mp.quad(f, pts)) - KAPPA**P * r**P / P


def main():
    rs = [mp.mpf(10) ** (-1 + 2 * mp.mpf(k) / 19) for k in range(20)]
    vals = [mp.exp(log_ratio(r)) for r in rs]
    for r, v in zip(rs, vals):
        print(mp.nstr(r, 17), mp.nstr(v, 20))
    print("band", mp.nstr(max(vals) / min(vals), 20))
    print("r0", mp.nstr(mp.exp(log_ratio(mp.mpf("1e-6"))), 20))
    lim = mp.quad(lambda l: mp.exp(-l**Q / (Q * KAPPA**Q)) * l ** ((Q - 2) / 2), [L0, 50, mp.inf])
    print("limit", mp.nstr(lim, 20))


if __name__ == "__main__":
    main()
