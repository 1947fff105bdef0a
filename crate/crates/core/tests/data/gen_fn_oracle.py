"""Regenerates fn_oracle.csv: (1 + lam)^-n - exp(-n lam) at 60 digits."""
import random

import mpmath

mpmath.mp.dps = 60
rng = random.Random(7)

rows = []
while len(rows) < 1000:
    lam = 10.0 ** rng.uniform(-8.0, 4.0)
    n = int(round(10.0 ** rng.uniform(0.0, 5.0)))
    L = mpmath.mpf(lam)
    value = (1 + L) ** (-n) - mpmath.exp(-n * L)
    if abs(value) <= mpmath.mpf("1e-300"):
        continue
    rows.append((lam, n, mpmath.nstr(value, 20, min_fixed=0, max_fixed=0)))

with open("fn_oracle.csv", "w") as out:
    out.write("lambda,n,f\n")
    for lam, n, value in rows:
        out.write(f"{lam!r},{n},{value}\n")
