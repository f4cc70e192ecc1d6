#!/usr/bin/env python3
"""High-precision reference values frozen into the C++ unit tests.

Run with `python3 tests/oracles/compute_oracles.py`. Every value is computed
directly from the closed forms with 50-digit arithmetic (mpmath); none of this
code shares a path with the C++ implementation.
"""
from mpmath import mp, mpf, log, sqrt, exp, cosh, findroot, betainc

mp.dps = 50


def show(name, value):
    print(f"{name:40s} {mp.nstr(value, 20)}")


# KL((0.75, 0.25) || (0.5, 0.5))
show("kl_075_025", mpf("0.75") * log(mpf("1.5")) + mpf("0.25") * log(mpf("0.5")))

# McAllester: emp=0.1, kl=2, m=100, delta=0.05
emp, kl, m, d = mpf("0.1"), mpf(2), mpf(100), mpf("0.05")
show("mcallester", emp + sqrt((kl + log(m / d)) / (2 * (m - 1))))

# Catoni C=1
C = mpf(1)
show("catoni_C1", (C * emp + (kl + log(1 / d)) / m) / (1 - exp(-C)))
for Cv in ["1e-6", "0.1", "1", "5"]:
    Cv = mpf(Cv)
    show(f"catoni_prefactor_{mp.nstr(Cv, 3)}", Cv / (1 - exp(-Cv)))

# Kakade-Sridharan-Tewari: emp=0, kl=0, m=100, delta=0.05
show("kst", 4.5 * sqrt(mpf(2) / m) + sqrt(log(1 / d) / m))


# Matched-Catoni constants, c=1, c2=0.5, delta=0.05 (bisection oracle)
def ratio(x):
    return log(cosh(x)) / x


def matched(c, c2, delta):
    c, c2, delta = mpf(c), mpf(c2), mpf(delta)
    cp = (c - c2) / (1 + c2)
    target = cp / (cp + 2)
    lo, hi = mpf("1e-12"), mpf(10)
    for _ in range(300):
        mid = (lo + hi) / 2
        if ratio(mid) <= target:
            lo = mid
        else:
            hi = mid
    cap = 2 * (1 + c2) * (2 + cp) * log(4 / delta) / ((1 + c2) ** 2 / c2)
    lam = min(lo, cap)
    Cp = 2 * (1 + c2) * (2 + cp) / lam
    return lam, Cp, 3 * Cp, Cp, Cp * (3 + log(8)), cap


lam, Cp, C1, C2, C3, cap = matched(1, "0.5", "0.05")
show("matched_lambda_over_m", lam)
show("matched_Cprime", Cp)
show("matched_C1", C1)
show("matched_C3", C3)
show("matched_cap", cap)
for cv in ["0.5", "1", "2"]:
    show(f"matched_lambda_c={cv}", matched(cv, mpf(cv) / 2, "0.05")[0])
show("matched_bound_m1e4_emp0", (C2 * log(20) + C3) / 10**4)

# Flatness bound rate term, c=1, h=0.5, m=1000, kl=1, delta=0.05
c, h = mpf(1), mpf("0.5")
Cf = 2 * h**4 * c / (1 + 16 * h**2 * c)
show("flat_C", Cf)
show("flat_rate", 4 / (Cf * 1000) * (3 * 1 + log(20) + 5))

# Aligned Catoni constant: C / (1 - e^-C) = 1 + c for c = 1
Calign = findroot(lambda x: x / (1 - exp(-x)) - 2, 1.5)
show("aligned_C_c1", Calign)

# Clopper-Pearson one-sided upper limit, 3/1000 at 95%, via binomial CDF
def binom_cdf(k, n, p):
    return betainc(n - k, k + 1, 0, 1 - p, regularized=True)


lo, hi = mpf(0), mpf(1)
for _ in range(200):
    mid = (lo + hi) / 2
    if binom_cdf(3, 1000, mid) > mpf("0.05"):
        lo = mid
    else:
        hi = mid
show("cp_upper_3_1000", lo)
show("cp_upper_0_1000", 1 - mpf("0.05") ** (mpf(1) / 1000))
