#!/usr/bin/env python3
# Copyright 2026 The lmsr Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled benchmark tables and manifest.json.

Tables marked "transcribed" are copied from the historical sources. Tables
marked "reconstructed" are synthesized from the governing physical model with
seeded noise because the original measurements were not available when the
bundle was assembled; replace them with the source tables when possible and
rerun this script to refresh the checksums.
"""

import json
import math
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent


def fnv1a64(data: bytes) -> str:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def fmt(v: float) -> str:
    return repr(float(v))


def write_csv(name, header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in r))
    data = ("\n".join(lines) + "\n").encode()
    (HERE / f"{name}.csv").write_bytes(data)
    return data


def langmuir():
    # Langmuir (1918), nitrogen on mica at 90 K.
    p = [34, 23.8, 17.3, 13, 9.5, 7.4, 6.1, 5, 4, 3.4, 2.8]
    q = [33, 30.8, 28.2, 25.9, 23.9, 21.6, 19, 17, 15.1, 13.4, 12]
    return [(a, b) for a, b in zip(p, q)]


def dual_site():
    rng = np.random.default_rng(20240611)
    p = np.round(np.geomspace(0.02, 80.0, 24), 4)
    q = 1.35 * p / (0.11 + p) + 1.9 * p / (9.5 + p)
    q = q * (1.0 + rng.normal(0.0, 0.012, p.size))
    return [(float(a), float(round(b, 5))) for a, b in zip(p, q)]


def hubble():
    # Hubble (1929), Table 1: distance [Mpc], radial velocity [km/s].
    r = [0.032, 0.034, 0.214, 0.263, 0.275, 0.275, 0.45, 0.5, 0.5, 0.63, 0.8, 0.9,
         0.9, 0.9, 0.9, 1.0, 1.1, 1.1, 1.4, 1.7, 2.0, 2.0, 2.0, 2.0]
    v = [170, 290, -130, -70, -185, -220, 200, 290, 270, 200, 300, -30, 650, 150,
         500, 920, 450, 500, 500, 960, 500, 850, 800, 1090]
    return [(float(a), float(b)) for a, b in zip(r, v)]


def kepler():
    # Semi-major axis [AU] and sidereal period [days], classical planets.
    a = [0.387098, 0.723332, 1.0, 1.523679, 5.2044, 9.5826]
    t = [87.9691, 224.701, 365.256, 686.98, 4332.59, 10759.22]
    return list(zip(a, t))


def bode():
    # Planet index (Mercury=1 ... Uranus=8, Ceres as 5) and semi-major axis [AU].
    a = [0.387, 0.723, 1.0, 1.524, 2.767, 5.203, 9.537, 19.191]
    return [(float(i + 1), x) for i, x in enumerate(a)]


def nikuradse():
    rng = np.random.default_rng(1933)
    classes = [(507.0, 61), (252.0, 61), (126.0, 60), (60.0, 60), (30.6, 60), (15.0, 60)]
    rows = []
    for rk, n in classes:
        lo = 2.55 + 0.05 * rng.random()
        hi = 5.4 + 0.6 * math.log10(rk) / math.log10(507.0)
        logre = np.sort(rng.uniform(lo, hi, n))
        for x in logre:
            re = 10.0 ** x
            lam_lam = 64.0 / re
            # Colebrook-White fixed point for the turbulent branch.
            lam = 0.03
            for _ in range(60):
                lam = (-2.0 * math.log10(1.0 / (2.0 * rk * 3.7) + 2.51 / (re * math.sqrt(lam)))) ** -2
            w = 1.0 / (1.0 + math.exp(-(x - 3.45) / 0.06))
            y = math.log10(100.0 * ((1.0 - w) * lam_lam + w * lam))
            y += rng.normal(0.0, 0.004)
            rows.append((round(float(x), 4), rk, round(y, 5)))
    return rows


DATASETS = [
    dict(
        id="langmuir",
        header=["x1", "y"],
        rows=langmuir,
        source="Langmuir (1918), J. Am. Chem. Soc. 40, 1361; nitrogen on mica at 90 K",
        provenance="transcribed",
        context="The data is about nitrogen adsorbing onto mica where the independent variable (x1) "
        "is pressure, and the dependent variable (y) is loading.",
        target="c1*x1/(c2+x1)",
        easy_extra_ops=[],
    ),
    dict(
        id="dual_site_langmuir",
        header=["x1", "y"],
        rows=dual_site,
        source="Isobutane on silicalite (two-site isotherm); reconstructed from the dual-site model with 1.2% noise",
        provenance="reconstructed",
        context="The data is about isobutane adsorbing onto silicalite at constant temperature, where the "
        "independent variable (x1) is pressure, and the dependent variable (y) is loading.",
        target="c1*x1/(c2+x1)+c3*x1/(c4+x1)",
        easy_extra_ops=[],
    ),
    dict(
        id="hubble",
        header=["x1", "y"],
        rows=hubble,
        source="Hubble (1929), PNAS 15, 168, Table 1",
        provenance="transcribed",
        context="The data is about physical cosmology where the independent variable (x1) is proper "
        "distance to a galaxy and the dependent variable (y) is its speed of separation.",
        target="c1*x1",
        easy_extra_ops=[],
    ),
    dict(
        id="kepler",
        header=["x1", "y"],
        rows=kepler,
        source="Standard orbital elements of the six classical planets",
        provenance="transcribed",
        context="The data is about planetary motion in astrophysics where the independent variable (x1) "
        "is semi-major axis, and the dependent variable (y) is period in days.",
        target="c1*x1^(3/2)",
        easy_extra_ops=["sqrt"],
    ),
    dict(
        id="bode",
        header=["x1", "y"],
        rows=bode,
        source="Standard semi-major axes, Mercury through Uranus with Ceres",
        provenance="transcribed",
        context="The data is about planetary system where the independent variable (x1) is planet index "
        "and the dependent variable (y) is semi-major axis.",
        target="c1*exp(c2*x1)+c3",
        easy_extra_ops=["^", "exp"],
    ),
    dict(
        id="nikuradse",
        header=["x1", "x2", "y"],
        rows=nikuradse,
        source="Nikuradse (1933) rough-pipe friction; reconstructed from laminar and Colebrook-White "
        "branches over the six original r/k classes with 0.004 noise",
        provenance="reconstructed",
        context="The data is about turbulent friction in rough pipes where the independent variables are "
        "the logarithm of the Reynolds number (x1) and the relative roughness of the pipe r/k (x2), and "
        "the dependent variable (y) is the logarithm of 100 times the friction factor.",
        target=None,
        easy_extra_ops=["^"],
        references=dict(
            metric="mae",
            rows=[
                dict(label="BMS", mae="0.00392", complexity="37"),
                dict(label="EFS", mae="0.00941", complexity=""),
                dict(label="Best GPT-4", mae="0.01086", complexity="41"),
                dict(label="Best GPT-4o", mae="0.00924", complexity="27"),
                dict(label="P1S1", mae="0.02270419", complexity="13"),
                dict(label="P1S2", mae="0.00978477", complexity="29"),
                dict(label="P2S1", mae="0.00897093", complexity="69"),
                dict(label="P2S2", mae="0.00931620", complexity="49"),
                dict(label="P3S1", mae="0.01086397", complexity="41"),
                dict(label="P3S2", mae="0.00992712", complexity="49"),
                dict(label="P1S1o", mae="0.02007803", complexity="19"),
                dict(label="P1S2o", mae="0.02141686", complexity="17"),
                dict(label="P2S1o", mae="0.00954461", complexity="27"),
                dict(label="P2S2o", mae="0.01186963", complexity="27"),
                dict(label="P3S1o", mae="0.00923655", complexity="27"),
                dict(label="P3S2o", mae="0.01144178", complexity="19"),
            ],
        ),
    ),
]


def main():
    manifest = {"version": 1, "datasets": []}
    for d in DATASETS:
        rows = d["rows"]()
        data = write_csv(d["id"], d["header"], rows)
        (HERE / f"{d['id']}.context.txt").write_text(d["context"] + "\n")
        entry = {
            "id": d["id"],
            "file": f"{d['id']}.csv",
            "source": d["source"],
            "provenance": d["provenance"],
            "rows": len(rows),
            "checksum_fnv1a64": fnv1a64(data),
            "target": d["target"],
            "easy_extra_ops": d["easy_extra_ops"],
        }
        if "references" in d:
            entry["references"] = d["references"]
        manifest["datasets"].append(entry)
    (HERE / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
