"""Deterministic simulator and analysis toolkit for rebalancing cyclic replicated storage.

The package simulates two cluster-membership changes over a shared broadcast
bus, bit for bit: removing a node (two coded XOR schedules plus an uncoded
baseline) and adding a node. It verifies the result is a balanced cyclic
layout with every original atom preserved, and cross-checks measured traffic
against closed-form loads in exact rational arithmetic.
"""

from .addition import (
    AdditionPlan,
    AdditionRun,
    addition_lower_bound,
    make_addition_plan,
    rebalance_add,
)
from .analytics import (
    Claim1Report,
    LoadReport,
    addition_load,
    best_removal_load,
    choose_scheme,
    corner_overhead,
    full_removal_load,
    load_scheme1,
    load_scheme2,
    removal_lower_bound,
    threshold,
    uncoded_removal_load,
    verify_claim1,
)
from .bus import Broadcast, TransmissionLog, broadcast_class, broadcast_uncoded, broadcast_xor, decode_at_node
from .errors import (
    DecodeFailureError,
    MergeFailureError,
    ParameterError,
    ProtocolViolationError,
    RebalanceError,
    UnsupportedConfigError,
)
from .model import (
    Atom,
    Database,
    SegmentLabel,
    StoredPiece,
    SubsegmentLabel,
    SystemParams,
    atom_payload,
    box_minus,
    box_plus,
    build_cyclic_database,
    cyclic_range,
    default_params,
    relabel_for_removed_node,
    segment_content,
    slice_atoms,
    storage_set,
)
from .removal_merge import MergePart, MergeRecipe, apply_merge, build_merge_recipes
from .removal_schemes import (
    SCHEME_CHOICES,
    RemovalRun,
    deliver,
    rebalance_remove,
    run_scheme1,
    run_scheme2,
    run_uncoded_removal,
)
from .removal_split import CornerSplit, SplitPlan, make_split_plan, split_corners, split_middle
from .verify import (
    ExpectedTarget,
    VerificationReport,
    addition_expected_layout,
    drop_broadcast,
    flip_stored_bit,
    removal_expected_layout,
    reorder_replica_parts,
    verify_cyclic_balanced,
    verify_preservation,
)

__all__ = [
    "AdditionPlan",
    "AdditionRun",
    "Atom",
    "Broadcast",
    "Claim1Report",
    "CornerSplit",
    "Database",
    "DecodeFailureError",
    "ExpectedTarget",
    "LoadReport",
    "MergeFailureError",
    "MergePart",
    "MergeRecipe",
    "ParameterError",
    "ProtocolViolationError",
    "RebalanceError",
    "RemovalRun",
    "SCHEME_CHOICES",
    "SegmentLabel",
    "SplitPlan",
    "StoredPiece",
    "SubsegmentLabel",
    "SystemParams",
    "TransmissionLog",
    "UnsupportedConfigError",
    "VerificationReport",
    "addition_expected_layout",
    "addition_load",
    "addition_lower_bound",
    "apply_merge",
    "atom_payload",
    "best_removal_load",
    "box_minus",
    "box_plus",
    "broadcast_class",
    "broadcast_uncoded",
    "broadcast_xor",
    "build_cyclic_database",
    "build_merge_recipes",
    "choose_scheme",
    "corner_overhead",
    "cyclic_range",
    "decode_at_node",
    "default_params",
    "deliver",
    "drop_broadcast",
    "flip_stored_bit",
    "full_removal_load",
    "load_scheme1",
    "load_scheme2",
    "make_addition_plan",
    "make_split_plan",
    "rebalance_add",
    "rebalance_remove",
    "relabel_for_removed_node",
    "removal_expected_layout",
    "removal_lower_bound",
    "reorder_replica_parts",
    "run_scheme1",
    "run_scheme2",
    "run_uncoded_removal",
    "segment_content",
    "slice_atoms",
    "split_corners",
    "split_middle",
    "storage_set",
    "threshold",
    "uncoded_removal_load",
    "verify_claim1",
    "verify_cyclic_balanced",
    "verify_preservation",
]
