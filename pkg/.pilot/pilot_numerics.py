"""Pilot: pin down (1) the Poisson-mixture maximum, (2) finite-n overlap bias."""
from fractions import Fraction
import math

import numpy as np

# ---- (1) Poisson mixture h(lambda) = 0.99 + e^{-lam} * p(lam) ----
a = Fraction(2240, 2187) - Fraction(99, 100)
b = Fraction(19712, 19683) - Fraction(99, 100)
print("a =", a, float(a))
print("b =", b, float(b))


def h(lam: float) -> float:
    p = float(a) * (lam**7 / 5040 + lam**9 / 362880) + float(b) * lam**11 / 39916800
    return 0.99 + math.exp(-lam) * p


grid = np.linspace(0.01, 60, 600000)
vals = np.array([h(x) for x in grid])
i = int(np.argmax(vals))
print("coarse argmax lambda =", grid[i], "h =", vals[i])

# golden section around the argmax
lo, hi = grid[i] - 0.01, grid[i] + 0.01
invphi = (math.sqrt(5) - 1) / 2
x1, x2 = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
f1, f2 = h(x1), h(x2)
for _ in range(200):
    if f1 < f2:
        lo, x1, f1 = x1, x2, f2
        x2 = lo + invphi * (hi - lo)
        f2 = h(x2)
    else:
        hi, x2, f2 = x2, x1, f1
        x1 = hi - invphi * (hi - lo)
        f1 = h(x1)
print("argmax lambda* =", (lo + hi) / 2, "h(lambda*) =", h((lo + hi) / 2))
print("h < 0.999 ?", h((lo + hi) / 2) < 0.999)
print("h < 0.9999?", h((lo + hi) / 2) < 0.9999)
print("h(8.0) =", h(8.0), " h(8.2) =", h(8.2), " h(9.0) =", h(9.0))

# ---- (2) exact finite-n overlap probabilities at np = 50 ----
n = 100_000
p = 50 / n


def binom_pmf(m: int, pr: float, kmax: int) -> np.ndarray:
    # stable iterative pmf of Bin(m, pr) on 0..kmax
    out = np.zeros(kmax + 1)
    logq = m * math.log1p(-pr)
    out[0] = math.exp(logq)
    ratio = pr / (1 - pr)
    for k in range(1, kmax + 1):
        out[k] = out[k - 1] * ratio * (m - k + 1) / k
    return out


KMAX = 220

# single vertex: same-side count S ~ Bin(n/2 - 1, p), opposite O ~ Bin(n/2, p)
# E_v = {S <= O}  (not-internal reading it does not matter for the bias size)
S = binom_pmf(n // 2 - 1, p, KMAX)
O = binom_pmf(n // 2, p, KMAX)
print("pmf mass check:", S.sum(), O.sum())
cdfO = np.cumsum(O)
pr_ge = float(np.sum(S * (1 - cdfO + O)))  # Pr[O >= S]
pr_tie = float(np.sum(S * O))
print("Pr[O >= S] =", pr_ge, " (vs 1/2; bias = %.5f)" % (pr_ge - 0.5))
print("Pr[tie] =", pr_tie)

for alpha in (0.3, 0.5, 0.7):
    n11 = n22 = int(alpha * n / 2)
    n12 = n21 = int((1 - alpha) * n / 2)
    # same-class vertex: A = d22 - d11, B = d21 - d12, E_v ∩ E_v' = {A >= |B|}
    pA1 = binom_pmf(n22, p, KMAX)
    pA2 = binom_pmf(n11, p, KMAX)
    pB1 = binom_pmf(n21, p, KMAX)
    pB2 = binom_pmf(n12, p, KMAX)
    # difference distributions on [-KMAX, KMAX]
    dA = np.convolve(pA1, pA2[::-1])  # index i -> A = i - KMAX
    dB = np.convolve(pB1, pB2[::-1])
    offs = np.arange(-KMAX, KMAX + 1)
    cdfA = np.cumsum(dA)
    # Pr[A >= t] for t in offs
    prA_ge = 1 - cdfA + dA
    joint = 0.0
    for bi, pb in zip(offs, dB):
        t = abs(bi)
        joint += pb * prA_ge[t + KMAX]
    target = math.atan(math.sqrt(alpha / (1 - alpha))) / math.pi
    print(
        f"alpha={alpha}: exact p_same(finite n)={joint:.5f}"
        f"  arctan target={target:.5f}  bias={joint - target:+.5f}"
    )
    # diff-class vertex: swap roles -> A' = d21 - d12? by symmetry use 1-alpha
    targetd = math.atan(math.sqrt((1 - alpha) / alpha)) / math.pi
    # For c(v) != c'(v): E_v ∩ E_v' = {A' >= |B'|} with A' = d12 - d21? cells swap:
    pA1d = binom_pmf(n21, p, KMAX)
    pA2d = binom_pmf(n12, p, KMAX)
    pB1d = binom_pmf(n22, p, KMAX)
    pB2d = binom_pmf(n11, p, KMAX)
    dAd = np.convolve(pA1d, pA2d[::-1])
    dBd = np.convolve(pB1d, pB2d[::-1])
    cdfAd = np.cumsum(dAd)
    prA_ged = 1 - cdfAd + dAd
    jointd = 0.0
    for bi, pb in zip(offs, dBd):
        t = abs(bi)
        jointd += pb * prA_ged[t + KMAX]
    print(
        f"        exact p_diff(finite n)={jointd:.5f}"
        f"  arctan target={targetd:.5f}  bias={jointd - targetd:+.5f}"
        f"  sum={joint + jointd:.5f}"
    )
