"""Independent reference values for the Rust test suite.

Everything here is evaluated by direct summation at 60 significant digits
with mpmath; nothing shares code or formulas with the library beyond the
channel definition itself. Run `python3 tools/oracle.py` and paste the
printed constants into crates/core/tests/oracle.rs when they change.
"""
import mpmath as mp

mp.mp.dps = 60


def pois(k, lam):
    if lam == 0:
        return mp.mpf(1) if k == 0 else mp.mpf(0)
    return mp.exp(-lam + k * mp.log(lam) - mp.loggamma(k + 1))


def geom(k, en):
    return (1 / (1 + en)) * (en / (1 + en)) ** k


def row(noise, lam, ymax):
    kind, en = noise
    if kind == "none":
        return [pois(y, lam) for y in range(ymax + 1)]
    if kind == "poisson":
        return [pois(y, lam + en) for y in range(ymax + 1)]
    p = [pois(k, lam) for k in range(ymax + 1)]
    g = [geom(k, en) for k in range(ymax + 1)]
    return [mp.fsum(p[k] * g[y - k] for k in range(y + 1)) for y in range(ymax + 1)]


def mi(points, noise, eps, ymax):
    rows = [(p, row(noise, eps * x, ymax)) for x, p in points]
    out = [mp.fsum(p * r[y] for p, r in rows) for y in range(ymax + 1)]
    total = mp.mpf(0)
    for p, r in rows:
        for y in range(ymax + 1):
            if r[y] > 0:
                total += p * r[y] * mp.log(r[y] / out[y])
    return total


def pem(m):
    n = 2 ** m
    return [(mp.mpf(2 * k) / (n - 1), mp.mpf(1) / n) for k in range(n)]


def flash(p):
    p = mp.mpf(p)
    return [(mp.mpf(0), 1 - p), (1 / p, p)]


def upper(eps):
    e = mp.e
    eps = mp.mpf(eps)
    return mp.log((1 + (mp.sqrt(2 * e) - 1) / mp.sqrt(1 + 2 * eps)) * (eps + mp.mpf(1) / 2) ** (eps + mp.mpf(1) / 2) / (mp.sqrt(e) * eps ** eps))


def flash_ratio(t):
    # I_b(p)/p at eps = e^{-t}, p = eps t, straight from the two-output law
    t = mp.mpf(t)
    eps = mp.exp(-t)
    p = eps * t
    d = p * (1 - mp.exp(-eps / p))
    h = lambda q: -q * mp.log(q) - (1 - q) * mp.log1p(-q)
    return (h(d) - p * h(d / p)) / p


def geo_divergence(lam, en, ymax):
    a = row(("geometric", en), lam, ymax)
    b = row(("geometric", en), 0, ymax)
    return mp.fsum(a[y] * mp.log(a[y] / b[y]) for y in range(ymax + 1))


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


if __name__ == "__main__":
    custom = [(mp.mpf(0), mp.mpf("0.2")), (mp.mpf("0.5"), mp.mpf("0.3")), (mp.mpf("1.7"), mp.mpf("0.5"))]
    cases = [
        ("MI_PEM2_GEOM1_EPS1E-3", pem(2), ("geometric", 1), "1e-3", 60),
        ("MI_PEM2_GEOM1_EPS1", pem(2), ("geometric", 1), 1, 80),
        ("MI_PEM2_GEOM01_EPS5", pem(2), ("geometric", mp.mpf("0.1")), 5, 80),
        ("MI_PEM1_POIS05_EPS03", pem(1), ("poisson", mp.mpf("0.5")), "0.3", 60),
        ("MI_PEM3_NONE_EPS2", pem(3), ("none", 0), 2, 80),
        ("MI_CUSTOM_NONE_EPS07", custom, ("none", 0), "0.7", 60),
        ("MI_CUSTOM_GEOM2_EPS4", custom, ("geometric", 2), 4, 200),
        ("MI_FLASH01_NONE_EPS1E-2", flash("0.1"), ("none", 0), "1e-2", 60),
    ]
    for name, pts, noise, eps, ymax in cases:
        show(name, mi(pts, noise, mp.mpf(eps), ymax))
    for e in ["1e-12", "1e-3", "1", "100"]:
        show(f"UPPER_{e}", upper(e))
    for t in [50, 706]:
        show(f"FLASH_RATIO_T{t}", flash_ratio(t))
    show("DIV_GEOM_LAM3_EN05", geo_divergence(3, mp.mpf("0.5"), 200))
    show("DIV_GEOM_LAM20_EN2", geo_divergence(20, 2, 400))
