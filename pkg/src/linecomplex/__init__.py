"""Line complexes of branched coverings of the sphere, and tools for their type."""

from .complex_core import INFINITE, Color, LineComplex, complex_stats, trace_faces, validate
from .dilatation import JacobianSample, annulus_modulus, dilatation_quotient, plane_vs_disc_demo
from .exhaustion import limit_estimate, wreath_exhaust
from .hurwitz import MonodromyDatum, build_from_monodromy, covering_summary
from .rules import exp_rule, modular_rule, tree_rule
from .type_criterion import (Verdict, chain_profile, check_conditions, classify_regular,
                             counterexample_family, nevanlinna_conjecture_eval,
                             teichmueller_verdict, to_speiser_tree)
from .walk_oracle import adaptive_oracle, effective_resistance, oracle_verdict, simulate_walk

__version__ = "0.1.0"
