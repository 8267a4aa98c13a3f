"""Action functions, Calabi invariants and mean-action spectra of Hamiltonian
isotopies of the closed unit disc, with executable checks of the associated
inequalities and spectral-membership statements.

Conventions: ``omega = dx ^ dy``, ``lambda0 = (x dy - y dx) / 2`` and
``X_H = (H_y, -H_x)``.  Actions are in raw area units (the disc has area pi).
"""
from .action import (DISC_AREA, ActionSample, action_function, action_of_loop,
                     boundary_line_integral, calabi, calabi_report, primitive_shift_test, sigma,
                     verify_sigma_pde)
from .errors import (BoundaryViolation, CenterOnLoop, DiscActionError, IndeterminateCase,
                     InvalidShape, NotClosed, OutsideAnnulus, OutsideDisc, PreconditionRho,
                     RootIsolationFailure, StepRejection, UndersampledLoop)
from .flow import (FlowBatch, FlowJacobian, OrbitTrace, area_ratios, flow_jacobian,
                   integrate_orbit, propagate, time_one_map)
from .geometry import (LoopSample, PlanePoint, degree_length_check, enclosed_area, loop_length,
                       winding_number)
from .hamiltonians import (FourierMode, HamiltonianSpec, LinearCombination, Mollified,
                           PerturbedRadial, PrecomposedRotation, RadialPoly, RadialStaircase,
                           RotationFamily, build_mollified, build_staircase, evaluate, from_dict,
                           hofer_norm, mollifier_diagnostics, negate, precompose_rotation, to_dict,
                           zero_hamiltonian)
from .radial import (circle_orbit_check, monotonicity_check_radial, resonant_levels,
                     rotation_spectral_invariants, staircase_gap_certificate,
                     subadditivity_check_rotations, tangent_spectrum)
from .smooth import MollifierProfile
from .spectrum import (PeriodicOrbitRecord, SpectrumReport, birkhoff_mean_action,
                       boundary_mean_action, boundary_rotation_number, find_periodic_orbits,
                       interior_mean_spectrum)
from .verify import (Status, VerificationVerdict, check_boundary_in_closure, check_hutchings,
                     check_membership, check_quantitative_brouwer, check_wind_bound, run_all,
                     shipped_families)

__version__ = "0.1.0"
