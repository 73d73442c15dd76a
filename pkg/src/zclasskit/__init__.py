"""Centralizer-conjugacy (z-class) computations in matrix groups over finite fields."""
from __future__ import annotations

from .errors import BadCharacteristic, BoundExceeded, ConsistencyError, ZkError
from .ff import FieldCtx, FqElem, make_field, parse_field, power_class_count
from .galh1 import (
    Cocycle,
    H1Result,
    TwistedClassSet,
    TwistedGroup,
    cocycle_check,
    cocycle_of_form,
    diagonalizer_over_ext,
    h1_mu_n,
    kernel_under_map,
    make_twisted,
    twisted_classes,
    twisted_from_matrices,
    twisted_from_quotient,
)
from .grpcore import (
    BOREL_GL,
    BOREL_SL,
    DIHEDRAL,
    GL,
    HEISENBERG,
    KINDS,
    SL,
    UNIPOTENT,
    FamilySpec,
    GroupTable,
    QuotientGroup,
    Subgroup,
    VirtualGroup,
    centralizer,
    closure_generate,
    conjugacy_classes,
    instantiate,
    normalizer,
    parse_element_spec,
    parse_group_spec,
    quotient,
    subgroup_from_members,
    subgroups_conjugate,
)
from .matfq import (
    Mat,
    charpoly,
    gl_conjugate_test,
    heisenberg_element,
    is_semisimple,
    is_unipotent,
    mat_embed,
    mat_literal,
    mat_parse,
    minpoly,
    regular_unipotent,
    sl_conjugate_test,
)
from .paperlab import (
    CATALOG,
    SUITES,
    Experiment,
    SuiteReport,
    run_experiment,
    verify_suite,
)
from .zclass import (
    FormSet,
    GrowthDegree,
    ProbeReport,
    StabilizeResult,
    ZBlock,
    ZPartition,
    base_change_probe,
    fusion_count,
    geometric_stabilize,
    growth_degree,
    regular_semisimple_filter,
    regular_unipotent_filter,
    structural_z_equivalent,
    z_equivalent,
    z_partition,
)

__version__ = "0.1.0"

__all__ = [
    "BadCharacteristic",
    "BoundExceeded",
    "ConsistencyError",
    "ZkError",
    "FieldCtx",
    "FqElem",
    "make_field",
    "parse_field",
    "power_class_count",
    "Cocycle",
    "H1Result",
    "TwistedClassSet",
    "TwistedGroup",
    "cocycle_check",
    "cocycle_of_form",
    "diagonalizer_over_ext",
    "h1_mu_n",
    "kernel_under_map",
    "make_twisted",
    "twisted_classes",
    "twisted_from_matrices",
    "twisted_from_quotient",
    "BOREL_GL",
    "BOREL_SL",
    "DIHEDRAL",
    "GL",
    "HEISENBERG",
    "KINDS",
    "SL",
    "UNIPOTENT",
    "FamilySpec",
    "GroupTable",
    "QuotientGroup",
    "Subgroup",
    "VirtualGroup",
    "centralizer",
    "closure_generate",
    "conjugacy_classes",
    "instantiate",
    "normalizer",
    "parse_element_spec",
    "parse_group_spec",
    "quotient",
    "subgroup_from_members",
    "subgroups_conjugate",
    "Mat",
    "charpoly",
    "gl_conjugate_test",
    "heisenberg_element",
    "is_semisimple",
    "is_unipotent",
    "mat_embed",
    "mat_literal",
    "mat_parse",
    "minpoly",
    "regular_unipotent",
    "sl_conjugate_test",
    "CATALOG",
    "SUITES",
    "Experiment",
    "SuiteReport",
    "run_experiment",
    "verify_suite",
    "FormSet",
    "GrowthDegree",
    "ProbeReport",
    "StabilizeResult",
    "ZBlock",
    "ZPartition",
    "base_change_probe",
    "fusion_count",
    "geometric_stabilize",
    "growth_degree",
    "regular_semisimple_filter",
    "regular_unipotent_filter",
    "structural_z_equivalent",
    "z_equivalent",
    "z_partition",
    "__version__",
]
