"""Recompute the derived reference values used by the test suite.

Only the standard library is used; nothing is imported from ``uavcoal``,
so these numbers are an independent check on the package. The printed
values are frozen into tests/reference_values.py.
"""
import math
from itertools import product

LOG20 = math.log10(20)


def importance(s):
    return math.log10(s + 1) / LOG20


def noise(dbm):
    return 10 ** ((dbm - 30) / 10)


def rate(b, p, g_db, interference, n0):
    return b * math.log2(1 + p * 10 ** (g_db / 10) / (interference + b * n0))


def bell(n):
    # Bell triangle, a different recurrence from the binomial sum
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


# printed singleton valuations (UAV, cell) -> value
TABLE = {(3, 1): 43.4, (3, 2): 49.9, (3, 3): 59.0, (4, 1): 39.7, (4, 2): 47.6, (4, 3): 63.1,
         (5, 1): 34.7, (5, 2): 45.6, (5, 3): 64.2, (6, 1): 34.0, (6, 2): 53.6, (6, 3): 76.9}
DEPOTS = {3: (100, 600), 4: (600, 200), 5: (900, 200), 6: (800, 800)}
CELLS = {1: ((200, 300), 18.4), 2: ((500, 700), 25.2), 3: ((800, 600), 34.6)}


def fit_latency_scale(exclude=()):
    """Least-squares C in  v = 1.5*sigma + 0.5*C/t  over the printed entries."""
    num = den = 0.0
    for (u, c), v in TABLE.items():
        if (u, c) in exclude:
            continue
        (cx, cy), sigma = CELLS[c]
        x = 0.5 / (math.hypot(DEPOTS[u][0] - cx, DEPOTS[u][1] - cy) / 10)
        num += x * (v - 1.5 * sigma)
        den += x * x
    return num / den


def main():
    print(f"latency_scale fit, all entries: {fit_latency_scale():.2f}")
    print(f"latency_scale fit, without UAV 5/Cell 3: {fit_latency_scale({(5, 3)}):.2f}")
    n0 = noise(-174)
    r = rate(400e3, 1.0, 5.0, 0.0, n0)
    values = {
        "importance_250": importance(250),
        "importance_32000": importance(32000),
        "noise_-174": n0,
        "flight_100_600_to_200_300": math.hypot(100, 300) / 10,
        "compute_energy": 1e-26 * 2e9 * 1e8 ** 2,
        "shannon_400k_1W_5dB": r,
        "time_500MB": 500 * 8e6 / r,
        "cost_example": 0.03 * (2 * 31.6227766 + 20 * 10),
        "revenue_rate": 3 * 18.4 / 60,
        "bell": [bell(n) for n in range(11)],
        # valuation of singleton UAVs: 0.5*3*sigma + 0.5*1000/t
        "valuations": {
            (u, c): 0.5 * 3 * s + 500 / (math.hypot(ux - cx, uy - cy) / 10)
            for (u, (ux, uy)), (c, (cx, cy), s) in product(
                [(3, (100, 600)), (4, (600, 200)), (5, (900, 200)), (6, (800, 800))],
                [(1, (200, 300), 18.4), (2, (500, 700), 25.2), (3, (800, 600), 34.6)])
        },
    }
    for k, v in values.items():
        print(f"{k}: {v!r}")


if __name__ == "__main__":
    main()
