import json

import numpy as np
import pytest


@pytest.fixture
def diagnostics_csv(tmp_path):
    path = tmp_path / "diagnostics.csv"
    ts = np.linspace(0.0, 1.0, 12)
    header = "t,mass,p1,p2,p3,energy,entropy,l2,linf,min_f,wsup_2,wsup_4"
    rows = [header]
    for t in ts:
        l2 = 0.15 * np.exp(-0.14 * t)
        rows.append(
            ",".join(
                "%.17g" % x
                for x in (t, 1.0, 0.0, 0.0, 0.0, 3.0 + 0.8 * t, -4.25 - 0.3 * t,
                          l2, 0.06 * np.exp(-0.25 * t), 1e-9, 0.1, 0.4)
            )
        )
    path.write_text("\n".join(rows) + "\n")
    return str(path)


@pytest.fixture
def scan_csv(tmp_path):
    # synthetic sharpness scan with the crossing at exactly gamma = -2.1
    path = tmp_path / "scan_phi.csv"
    gammas = np.linspace(-2.3, -1.9, 41)
    rows = ["gamma,phi,ratio"]
    for g in gammas:
        phi = 1.0 + 0.65 * (g + 2.1)  # linear through 1 at -2.1
        rows.append("%.17g,%.17g,%.17g" % (g, phi, 1.0 / (2.0 * phi - 1.0)))
    path.write_text("\n".join(rows) + "\n")
    return str(path), -2.1


@pytest.fixture
def landau_csv(tmp_path):
    path = tmp_path / "landau_limit.csv"
    rows = ["s,one_minus_s,op_gap,c1_gap"]
    for s, gap in ((0.9, 0.38), (0.99, 0.052), (0.999, 0.0055)):
        rows.append("%.17g,%.17g,%.17g,%.17g" % (s, 1 - s, gap, gap / 10))
    path.write_text("\n".join(rows) + "\n")
    return str(path)


@pytest.fixture
def snapshot_pair(tmp_path):
    def make(name, t, center=0.0):
        d, n, L = 3, 16, 8.0
        axis = -L + (2 * L / n) * np.arange(n)
        X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
        vals = np.exp(-((X - center) ** 2 + Y**2 + Z**2) / 2.0) / (2 * np.pi) ** 1.5
        prefix = str(tmp_path / name)
        with open(prefix + ".json", "w") as fh:
            json.dump({"d": d, "n": n, "L": L, "t": t}, fh)
        vals.astype("<f8").tofile(prefix + ".f64")
        return prefix

    return make
