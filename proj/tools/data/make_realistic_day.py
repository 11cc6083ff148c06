"""Generates the bundled synthetic "realistic day" profiles in data/.

The files imitate the shape of a winter weekday at an HV/MV substation
(night trough, morning and evening demand peaks, a midday PV bell with
passing clouds). They are synthetic and are not measured data.

    python3 tools/data/make_realistic_day.py
"""
import math
import pathlib
import random
from datetime import datetime, timedelta

OUT = pathlib.Path(__file__).resolve().parents[2] / "data"
START = datetime(2015, 2, 21)
HOURS = 26  # one day plus two hours of look-ahead


def gauss(t, center, width):
    return math.exp(-((t - center) ** 2) / (2 * width**2))


def load_mw(t, rng):
    h = t % 24
    base = 31.0 + 4.0 * math.sin(math.pi * (h - 6) / 24) ** 2
    morning = 13.0 * gauss(h, 9.25, 1.6)
    evening = 19.0 * gauss(h, 19.6, 1.3)
    return base + morning + evening + rng.gauss(0.0, 0.35)


def pv_mw(t, clouds):
    h = t % 24
    if h < 7.1 or h > 17.4:
        return 0.0
    bell = 9.5 * math.sin(math.pi * (h - 7.1) / 10.3) ** 1.5
    shade = 1.0
    for c, w, depth in clouds:
        shade -= depth * gauss(h, c, w)
    return max(0.0, bell * shade)


def main():
    rng = random.Random(20150221)
    OUT.mkdir(exist_ok=True)
    with open(OUT / "realistic_day_load.csv", "w") as f:
        f.write("timestamp,load_mw\n")
        for k in range(HOURS * 4 + 1):
            ts = START + timedelta(minutes=15 * k)
            f.write(f"{ts:%Y-%m-%dT%H:%M:%S},{load_mw(k / 4, rng):.3f}\n")
    clouds = [(10.4, 0.12, 0.55), (11.9, 0.2, 0.45), (13.5, 0.08, 0.6), (14.6, 0.15, 0.35)]
    with open(OUT / "realistic_day_pv.csv", "w") as f:
        f.write("timestamp,pv_mw\n")
        for k in range(HOURS * 12 + 1):
            ts = START + timedelta(minutes=5 * k)
            f.write(f"{ts:%Y-%m-%dT%H:%M:%S},{pv_mw(k / 12, clouds):.3f}\n")


if __name__ == "__main__":
    main()
