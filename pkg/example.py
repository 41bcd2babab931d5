#!/usr/bin/env python3
"""
Example script: simulate a weekly series, fit it and decompose it.
"""

from fdslrm import (
    FdslrmFitter,
    ModelSpec,
    SimulationConfig,
    TermSpec,
    VarianceComponents,
    blup_ne_moments,
    realize,
    sample_array,
)
from fdslrm.exceptions import FdslrmError


def main():
    """Main example function."""
    spec = ModelSpec(
        n=72,
        trend=(TermSpec.const(), TermSpec.cos(1), TermSpec.sin(3)),
        random=(TermSpec.cos(14), TermSpec.sin(14)),
    )
    nu_true = VarianceComponents(nu=(0.06, 0.024, 0.014))

    # Example 1: Simulate one series
    print("1. Simulating a series with nu =", nu_true.nu)
    config = SimulationConfig(spec=spec, beta=(4.5, 0.4, -0.3), nu_true=nu_true, seed=2019)
    series = sample_array(config)[0]
    print(f"   first values: {series[:4].round(3)}")

    # Example 2: Fit all estimators
    print("\n2. Fitting...")
    try:
        report = FdslrmFitter(spec, series).fit()
    except FdslrmError as e:
        print(f"Error: {e}")
        return
    for row in report.results:
        estimate = ", ".join(f"{v:.4f}" for v in row.estimate)
        line = f"   {row.method:<9} ({estimate})  |nu|={row.norm:.4f}"
        if row.eblupne_from is not None:
            line += f"  EBLUP-NE |nu|={row.eblupne_from_norm:.4f}"
        print(line)

    # Example 3: Decompose at the REMLE
    print("\n3. BLUE/BLUP decomposition at the REMLE...")
    blup = FdslrmFitter(spec, series).predict(method="remle")
    print(f"   beta* = {blup.beta_hat.round(4)}")
    print(f"   Y*    = {blup.y_hat.round(4)}")

    # Example 4: Exact moments of BLUP-NE at the true nu
    print("\n4. BLUP-NE moments at the true nu...")
    summary = blup_ne_moments(realize(spec), nu_true)
    print(f"   bias = {summary.bias}")
    print(f"   MSE  = {summary.mse}")

    print("\nExample complete!")


if __name__ == "__main__":
    main()
