"""Extending a disc Hamiltonian to the plane.

The mollified extension H_n agrees with H on the disc, vanishes outside
radius 1 + 1/n, and has sup norm outside the disc decaying like 1/n while its
gradient stays bounded.  The refined profile has slope at least -1/n, so
collar orbits barely wind.
"""
from discaction import RotationFamily, check_wind_bound, mollifier_diagnostics

d = mollifier_diagnostics(RotationFamily(0.5))
print(f"{'n':>5} {'sup outside':>12} {'grad outside':>13} {'leak':>6} {'min slope':>10}")
for row in d["rows"]:
    print(f"{row['n']:5d} {row['sup_outside']:12.3e} {row['grad_outside']:13.4f} "
          f"{row['support_leak']:6.0e} {row['refined_min_slope']:10.5f}")
print(f"log-log slope of sup norm: {d['sup_slope']:.4f}")
print(check_wind_bound(RotationFamily(0.5)).line())
