#!/usr/bin/env python3
"""Generate the frozen PMV reference table used by the test suite.

Independent ISO 7730 implementation: the clothing surface temperature is
solved by bisection on the full heat-balance residual (Stefan-Boltzmann
form in degrees Celsius), not by the fixed-point scheme the library uses.
Anchors from the standard's reference tables are checked before the file
is written.
"""

import math
import random
import sys


def saturation_vapour_pressure(ta_c: float) -> float:
    """Water vapour partial pressure at 100% RH, in Pa."""
    return 1000.0 * math.exp(16.6536 - 4030.183 / (ta_c + 235.0))


def clothing_temp_residual(tcl, ta, tr, vel, m, icl, fcl):
    hc_nat = 2.38 * abs(tcl - ta) ** 0.25
    hc_for = 12.1 * math.sqrt(vel)
    hc = max(hc_nat, hc_for)
    radiation = 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (tr + 273.0) ** 4)
    convection = fcl * hc * (tcl - ta)
    return tcl - (35.7 - 0.028 * m - icl * (radiation + convection))


def solve_clothing_temp(ta, tr, vel, m, icl, fcl):
    lo, hi = ta - 60.0, ta + 60.0
    f_lo = clothing_temp_residual(lo, ta, tr, vel, m, icl, fcl)
    f_hi = clothing_temp_residual(hi, ta, tr, vel, m, icl, fcl)
    if f_lo * f_hi > 0:
        raise ValueError("no sign change for clothing temperature bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = clothing_temp_residual(mid, ta, tr, vel, m, icl, fcl)
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo < 1e-10:
            break
    return 0.5 * (lo + hi)


def pmv_iso7730(ta, tr, vel, rh, met, clo):
    pa = rh / 100.0 * saturation_vapour_pressure(ta)
    m = met * 58.15
    icl = 0.155 * clo
    fcl = 1.0 + 1.29 * icl if icl <= 0.078 else 1.05 + 0.645 * icl

    tcl = solve_clothing_temp(ta, tr, vel, m, icl, fcl)
    hc = max(2.38 * abs(tcl - ta) ** 0.25, 12.1 * math.sqrt(vel))

    skin_diffusion = 3.05e-3 * (5733.0 - 6.99 * m - pa)
    sweating = 0.42 * (m - 58.15) if m > 58.15 else 0.0
    latent_respiration = 1.7e-5 * m * (5867.0 - pa)
    dry_respiration = 0.0014 * m * (34.0 - ta)
    radiation = 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (tr + 273.0) ** 4)
    convection = fcl * hc * (tcl - ta)

    sensitivity = 0.303 * math.exp(-0.036 * m) + 0.028
    value = sensitivity * (
        m
        - skin_diffusion
        - sweating
        - latent_respiration
        - dry_respiration
        - radiation
        - convection
    )
    return min(3.5, max(-3.5, value))


# Reference rows from the standard's validation table (PMV to 2 decimals).
ANCHORS = [
    (22.0, 22.0, 0.10, 60.0, 1.2, 0.5, -0.75),
    (27.0, 27.0, 0.10, 60.0, 1.2, 0.5, 0.77),
    (27.0, 27.0, 0.30, 60.0, 1.2, 0.5, 0.44),
]


def main(out_path: str) -> None:
    for ta, tr, vel, rh, met, clo, expected in ANCHORS:
        got = pmv_iso7730(ta, tr, vel, rh, met, clo)
        if abs(got - expected) > 0.015:
            raise SystemExit(
                f"anchor failed: inputs=({ta},{tr},{vel},{rh},{met},{clo}) "
                f"expected {expected} got {got:.4f}"
            )
        print(f"anchor ok: ({ta},{tr},{vel},{rh},{met},{clo}) -> {got:.4f}")

    rng = random.Random(20260809)
    rows = []
    while len(rows) < 200:
        ta = rng.uniform(10.0, 30.0)
        tr = rng.uniform(10.0, 40.0)
        vel = rng.uniform(0.0, 1.0)
        rh = rng.uniform(30.0, 70.0)
        met = rng.uniform(0.8, 4.0)
        clo = rng.uniform(0.0, 2.0)
        pa = rh / 100.0 * saturation_vapour_pressure(ta)
        if pa > 2700.0:  # ISO applicability bound on vapour pressure
            continue
        rows.append((ta, tr, vel, rh, met, clo, pmv_iso7730(ta, tr, vel, rh, met, clo)))

    with open(out_path, "w") as f:
        f.write("air_temp_c,radiant_temp_c,air_velocity_ms,rh_pct,met,clo,pmv\n")
        for ta, tr, vel, rh, met, clo, value in rows:
            f.write(
                f"{ta:.6f},{tr:.6f},{vel:.6f},{rh:.6f},{met:.6f},{clo:.6f},{value:.8f}\n"
            )
    print(f"wrote {len(rows)} reference rows to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/pmv_reference.csv")
