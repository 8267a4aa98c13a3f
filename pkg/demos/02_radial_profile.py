"""Tangent-line spectrum of the radial Hamiltonian H = 4 s (1 - s), s = |z|^2.

One-periodic orbits of a radial Hamiltonian are circles where the slope g'(s)
is a multiple of -pi.  Their action is the intercept g - s g' of the tangent
line at that level.  Each tabulated value is re-derived by integrating the
circle orbit and computing the action of the closed loop.
"""
from discaction import RadialPoly, calabi_report, circle_orbit_check, tangent_spectrum

H = RadialPoly((0.0, 4.0, -4.0))
ts = tangent_spectrum(H)
print("origin value  :", ts.origin_value)
print("boundary      :", ts.boundary_values)
print("interior levels (s, k, tangent value, value from integrated orbit):")
for row in circle_orbit_check(H, ts):
    print(f"  s={row['s']:.6f}  k={row['k']:+d}  value={row['value']:.9f}  "
          f"orbit={row['oracle_value']:.9f}")

rep = calabi_report(H)
print(f"\nCalabi via H        : {rep['calabi_H']:.6f}")
print(f"Calabi via sigma    : {rep['calabi_sigma']:.6f}  (twice the former)")
print(f"normalised by area  : {rep['calabi_sigma'] / 3.141592653589793:.6f}  (= 4/3)")
