#!/usr/bin/env python3
"""Regenerates crates/core/tests/fixtures/formula_grid.json.

Every expected value is evaluated with mpmath at 50 significant digits and
stored as a decimal string, so the Rust tests compare against an evaluation
that shares no code or floating-point path with the library.
"""

import json
import pathlib
import random

from mpmath import mp, mpf, sqrt, log, exp

mp.dps = 50


def compose(eps0, delta0, t, delta_prime):
    eps0, delta0, delta_prime = mpf(eps0), mpf(delta0), mpf(delta_prime)
    eps = sqrt(2 * t * log(1 / delta_prime)) * eps0 + t * eps0 * (exp(eps0) - 1)
    return eps, t * delta0 + delta_prime


def protocol_epsilon(sigma, n, t, delta):
    sn = mpf(sigma) * n
    return 4 * sqrt(2 * t * log(2 / mpf(delta))) / sn + 4 * t / sn**2


def lower_bound(tau, n0, n1):
    return 2 / (mpf(tau) * min(n0, n1))


def accuracy_bound(sigma, n0, n1, delta_fair):
    return 4 * mpf(sigma) * sqrt(2 * log(4 / mpf(delta_fair))) / min(n0, n1)


def defense_scale(t, eps_inf, n):
    return 2 * sqrt(t) / (mpf(eps_inf) * n)


def s(x):
    return mp.nstr(x, 30, strip_zeros=False)


def main():
    rng = random.Random(20240611)
    points = []

    fixed_compose = [(0.1, 0.0, 1, 1e-6), (0.1, 0.0, 10, 1e-6)]
    for i in range(20):
        if i < len(fixed_compose):
            eps0, delta0, t, dp = fixed_compose[i]
        else:
            eps0 = round(rng.uniform(0.01, 2.0), 6)
            delta0 = rng.choice([0.0, 1e-8, 1e-7, 1e-6])
            t = rng.randint(1, 500)
            dp = rng.choice([1e-9, 1e-6, 1e-5, 1e-3, 0.05])
        eps, delta = compose(eps0, delta0, t, dp)
        points.append({"formula": "compose", "epsilon0": eps0, "delta0": delta0,
                       "rounds": t, "delta_prime": dp, "epsilon": s(eps), "delta": s(delta)})

    for i in range(20):
        if i == 0:
            sigma, n, t, delta = 1.0, 50, 100, 1e-6
        else:
            sigma = round(rng.uniform(0.1, 10.0), 6)
            n = rng.randint(1, 200)
            t = rng.randint(1, 1000)
            delta = rng.choice([1e-9, 1e-6, 1e-4, 0.01])
        points.append({"formula": "protocol_epsilon", "sigma": sigma, "n": n, "rounds": t,
                       "delta": delta, "epsilon": s(protocol_epsilon(sigma, n, t, delta))})

    for i in range(20):
        if i == 0:
            tau, n0, n1 = 0.05, 100, 100
        elif i == 1:
            tau, n0, n1 = 0.05, 1000, 1000
        else:
            tau = round(rng.uniform(0.001, 0.5), 6)
            n0, n1 = rng.randint(1, 10**6), rng.randint(1, 10**6)
        points.append({"formula": "lower_bound", "tau": tau, "n0": n0, "n1": n1,
                       "epsilon": s(lower_bound(tau, n0, n1))})

    for i in range(20):
        if i == 0:
            sigma, n0, n1, df = 1.0, 1000, 3000, 0.05
        else:
            sigma = round(rng.uniform(0.01, 20.0), 6)
            n0, n1 = rng.randint(1, 10**5), rng.randint(1, 10**5)
            df = rng.choice([0.001, 0.01, 0.05, 0.1, 0.5])
        points.append({"formula": "accuracy_bound", "sigma": sigma, "n0": n0, "n1": n1,
                       "delta_fair": df, "epsilon": s(accuracy_bound(sigma, n0, n1, df))})

    for i in range(20):
        if i == 0:
            t, eps_inf, n = 100, 0.1, 50
        elif i == 1:
            t, eps_inf, n = 1, 2.0, 1
        else:
            t = rng.randint(1, 10**4)
            eps_inf = round(rng.uniform(0.01, 5.0), 6)
            n = rng.randint(1, 500)
        points.append({"formula": "defense_scale", "rounds": t, "epsilon_inf": eps_inf,
                       "n": n, "sigma": s(defense_scale(t, eps_inf, n))})

    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/formula_grid.json"
    out.write_text(json.dumps({"digits": mp.dps, "points": points}, indent=1) + "\n")
    print(f"wrote {len(points)} points to {out}")


if __name__ == "__main__":
    main()
