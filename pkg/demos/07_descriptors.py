"""Reaction descriptor criteria and proximity bands for the three tasks.

ORR wants *OH binding in 0.9-1.1 eV; CO2RR wants *CO in [-0.82, -0.52] eV
with *H at or above +0.33 eV; NRR wants *N in [-2.0, -0.5] eV with
delta = E(*N) - E(*N2) strictly positive. Bands feed the campaign's
near-miss gate: Close and Near verdicts keep the modification loop open.
"""

from catscreen.descriptors import check_co2rr, check_nrr, classify_orr

print("ORR (*OH window 0.9-1.1 eV):")
for e in (0.946, 1.1102, 1.25, 0.74, -5.15):
    verdict = classify_orr(e)
    print(f"  E = {e:+.4f} -> band {verdict.band:8s} pass={verdict.passed} "
          f"gap={verdict.gap:.4f}")

print("\nCO2RR (*CO in [-0.82, -0.52], *H >= 0.33):")
for e_co, e_h in ((-0.738, 0.379), (-0.433, 0.351), (-0.894, -0.132), (-0.613, 0.237)):
    verdict = check_co2rr(e_co, e_h)
    status = "PASS" if verdict.passed else f"FAIL {list(verdict.reasons)}"
    print(f"  E_CO = {e_co:+.3f}, E_H = {e_h:+.3f} -> {status}")

print("\nNRR (*N in [-2.0, -0.5], delta > 0):")
for e_n, e_n2 in ((-0.54, -0.65), (-1.05, -0.99), (-1.84, -2.24), (0.45, 0.30)):
    verdict = check_nrr(e_n, e_n2)
    label = "pass" if verdict.passed else ("near-miss" if verdict.band == "Close" else "fail")
    print(f"  E_N = {e_n:+.2f}, E_N2 = {e_n2:+.2f} -> delta {verdict.delta:+.2f} {label}")
