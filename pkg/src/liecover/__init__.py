"""Finite classical groups of Lie type and brute-force verification of
bounded product-covering statements.

Layers, bottom up: explicit finite fields (gf), root systems with twisted
class data (roots), matrix realizations of the classical groups together
with their automorphisms and distinguished subgroups (chevgrp), a solver
for the twisted-coefficient surjectivity systems that drive the covering
recipes (solver), a set-product verification engine (verifier), and a
command line harness (cli).
"""

from .chevgrp import (
    CompositeAutomorphism,
    GroupContext,
    GroupElement,
    TwistedParamGroup,
    build_group,
    d0_collapse,
    diag_aut,
    diag_element,
    field_aut,
    graph_aut,
    inner_aut,
    root_element,
    special_subgroup,
    steinberg_aut,
    twisted_param_group,
)
from .gf import (
    BudgetExceeded,
    FieldAutomorphism,
    FieldElement,
    FiniteField,
    fixed_field,
    frobenius_power,
    make_field,
    twisted_norm,
)
from .roots import (
    LatticeCharacter,
    Root,
    RootSystem,
    TwistedClass,
    build_root_system,
    character_from_assignment,
    sigma_prime_split,
    twisted_classes,
)

__all__ = [
    "BudgetExceeded",
    "CompositeAutomorphism",
    "FieldAutomorphism",
    "FieldElement",
    "FiniteField",
    "GroupContext",
    "GroupElement",
    "LatticeCharacter",
    "Root",
    "RootSystem",
    "TwistedClass",
    "TwistedParamGroup",
    "build_group",
    "build_root_system",
    "character_from_assignment",
    "d0_collapse",
    "diag_aut",
    "diag_element",
    "field_aut",
    "fixed_field",
    "frobenius_power",
    "graph_aut",
    "inner_aut",
    "make_field",
    "root_element",
    "sigma_prime_split",
    "special_subgroup",
    "steinberg_aut",
    "twisted_classes",
    "twisted_norm",
    "twisted_param_group",
]

__version__ = "0.1.0"
