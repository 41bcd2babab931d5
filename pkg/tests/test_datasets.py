"""Published estimates for the electricity, tourism and cyber-attack series.

The series are not distributed with the package. Put electricity.csv, tourism.csv and
cyberattacks.csv (raw weekly counts) into the directory named by FDSLRM_DATA_DIR to run
these tests.
"""

import json
import os
import tempfile

import numpy as np
import pytest

from fdslrm.cli import main
from fdslrm.config import DATA_DIR_ENV_VAR

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.environ.get(DATA_DIR_ENV_VAR)

# (data file, model config, log-transform, decimals, {method: (estimate, EBLUP-NE)})
PUBLISHED = [
    (
        "electricity.csv",
        "electricity_toy1.json",
        False,
        2,
        {
            "NE": ((3.53, 0.37, 1.86, 0.00, 1.26), (3.53, 0.12, 1.39, 0.00, 0.83)),
            "MLE": ((2.86, 0.13, 1.62, 0.00, 1.03), (3.53, 0.05, 1.42, 0.00, 0.84)),
            "REMLE": ((3.34, 0.09, 1.59, 0.00, 0.99), (3.53, 0.02, 1.35, 0.00, 0.77)),
        },
    ),
    (
        "electricity.csv",
        "electricity_toy2.json",
        False,
        2,
        {
            "NE": ((1.09, 2.97, 1.76, 0.37, 1.86), (1.09, 2.79, 1.59, 0.24, 1.69)),
            "MLE": ((0.93, 2.89, 1.68, 0.29, 1.79), (1.09, 2.81, 1.61, 0.23, 1.71)),
            "REMLE": ((1.09, 2.87, 1.67, 0.28, 1.77), (1.09, 2.79, 1.58, 0.21, 1.69)),
        },
    ),
    (
        "tourism.csv",
        "tourism.json",
        False,
        3,
        {
            "NE": ((0.108, 0.004, 0.230, 0.022), (0.108, 0.001, 0.225, 0.020)),
            "MLE": ((0.103, 0.001, 0.228, 0.021), (0.108, 0.000, 0.225, 0.020)),
            "REMLE": ((0.108, 0.001, 0.227, 0.021), (0.108, 0.000, 0.225, 0.020)),
        },
    ),
    (
        "cyberattacks.csv",
        "cyberattacks.json",
        True,
        4,
        {
            "NE": ((0.0593, 0.0255, 0.0155), (0.0593, 0.0225, 0.0127)),
            "MLE": ((0.0560, 0.0239, 0.0139), (0.0593, 0.0225, 0.0125)),
            "REMLE": ((0.0593, 0.0238, 0.0138), (0.0593, 0.0223, 0.0124)),
        },
    ),
]


@pytest.mark.parametrize("data_file,model_file,log_transform,decimals,rows", PUBLISHED)
def test_published_estimates(data_file, model_file, log_transform, decimals, rows):
    """Test the fit command reproduces NE, MLE, REMLE and their EBLUP-NE to the published precision."""
    if DATA_DIR is None or not os.path.exists(os.path.join(DATA_DIR, data_file)):
        pytest.skip(f"{data_file} not found; set {DATA_DIR_ENV_VAR}")
    args = ["fit", os.path.join(DATA_DIR, data_file), os.path.join(ROOT, "configs", model_file)]
    args += ["--methods", "ne,mle,remle", "--no-timing"]
    if log_transform:
        args.append("--log")
    with tempfile.TemporaryDirectory() as tmpdir:
        output = os.path.join(tmpdir, "report.json")
        main(args + ["-o", output])
        with open(output) as f:
            report = json.load(f)
    results = {item["method"]: item for item in report["results"]}

    tolerance = 0.6 * 10.0 ** (-decimals)
    for method, (estimate, eblupne) in rows.items():
        row = results[method]
        np.testing.assert_allclose(row["estimate"], estimate, rtol=0, atol=tolerance)
        np.testing.assert_allclose(row["eblupne_from"], eblupne, rtol=0, atol=tolerance)


if __name__ == "__main__":
    pytest.main([__file__])
