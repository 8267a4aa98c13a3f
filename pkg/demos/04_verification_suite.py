"""Run every verification check on a few families and print the verdicts.

Each check reports WITNESS_FOUND, INCONCLUSIVE (the sample did not settle
the question) or VIOLATION (a closed-form contradiction).  The winding check
needs |rho| < 1 on the boundary and is inconclusive otherwise.
"""
from discaction import RadialPoly, RotationFamily, run_all, zero_hamiltonian
from discaction.verify import exit_code

families = [zero_hamiltonian(), RotationFamily(0.37), RadialPoly((0.0, 4.0, -4.0))]
verdicts = run_all(families, K=8, grid=32)
for v in verdicts:
    print(v.line())
print("exit code:", exit_code(verdicts))
