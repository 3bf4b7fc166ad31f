"""Regenerate the frozen oracle dataset and the reference values for it.

Uses numpy for the draws and statsmodels as the reference implementation:

    python3 tools/oracle_fixture.py

Writes crates/core/tests/fixtures/oracle_data.csv and oracle_values.json.
"""

import json
from pathlib import Path

import numpy as np
import statsmodels
import statsmodels.api as sm
from statsmodels.tsa.stattools import adfuller
from statsmodels.tsa.vector_ar.vecm import coint_johansen

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"
N = 50
SEED = 20240601


def draw():
    rng = np.random.default_rng(SEED)
    x = np.cumsum(rng.normal(size=N))
    w = np.cumsum(0.2 + rng.normal(size=N))
    u = np.zeros(N)
    for t in range(1, N):
        u[t] = 0.4 * u[t - 1] + rng.normal(scale=0.5)
    y = 1.0 + 0.8 * x - 0.3 * w + u
    return np.column_stack([y, x, w])


def main():
    data = draw()
    names = ["y", "x", "w"]
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "oracle_data.csv", "w") as f:
        f.write("year," + ",".join(names) + "\n")
        for i, row in enumerate(data):
            f.write(str(1950 + i) + "," + ",".join(repr(float(v)) for v in row) + "\n")

    ols = sm.OLS(data[:, 0], sm.add_constant(data[:, 1:])).fit()
    adf = {
        n: float(adfuller(data[:, j], maxlag=1, autolag=None, regression="c")[0])
        for j, n in enumerate(names)
    }
    joh = coint_johansen(data, det_order=0, k_ar_diff=1)

    values = {
        "generator": f"numpy {np.__version__} default_rng({SEED}); statsmodels {statsmodels.__version__}",
        "ols": {
            "dependent": "y",
            "regressors": ["const", "x", "w"],
            "coefficients": [float(b) for b in ols.params],
            "std_errors": [float(s) for s in ols.bse],
        },
        "adf_tau_constant_lag1": adf,
        "johansen_case3_diff_lags1": {
            "eigenvalues": [float(v) for v in joh.eig],
            "trace": [float(v) for v in joh.lr1],
            "maxeig": [float(v) for v in joh.lr2],
        },
    }
    with open(OUT / "oracle_values.json", "w") as f:
        json.dump(values, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
