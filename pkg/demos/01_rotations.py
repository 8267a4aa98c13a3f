"""Rigid rotations: the simplest isotopies of the disc.

The rotation by 2 pi rho is generated by H = pi rho (1 - |z|^2).  Every point
has the same action pi rho, the Calabi invariant (normalised by the area) is
pi rho, and the boundary rotation number is rho.  The spectral invariants are
the clamps c_+ = clamp(pi rho, 0, pi) and c_- = clamp(pi rho, -pi, 0).
"""
import numpy as np

from discaction import (RotationFamily, boundary_rotation_number, calabi_report,
                        rotation_spectral_invariants, sigma)

rng = np.random.default_rng(0)
r = np.sqrt(rng.uniform(0, 1, 50))
th = rng.uniform(0, 2 * np.pi, 50)
pts = np.column_stack([r * np.cos(th), r * np.sin(th)])

print(f"{'rho':>6} {'sigma spread':>13} {'pi rho':>9} {'Cal/area':>9} {'rho_b':>8} {'c_+':>8} {'c_-':>8}")
for rho in (0.25, 0.5, 0.75, 1.5, -0.4):
    H = RotationFamily(rho)
    s = sigma(H, pts)
    cal = calabi_report(H)["calabi_sigma"] / np.pi
    inv = rotation_spectral_invariants(rho)
    print(f"{rho:6.2f} {np.ptp(s):13.2e} {np.pi * rho:9.5f} {cal:9.5f} "
          f"{boundary_rotation_number(H):8.5f} {inv.c_plus:8.5f} {inv.c_minus:8.5f}")

print("\nWhy c_+ is pinned for rho = 1.5:")
for line in rotation_spectral_invariants(1.5).derivation:
    print("  " + line)
