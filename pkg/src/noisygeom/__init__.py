"""Computational geometry with noisy Boolean primitives."""

from .errors import (
    BudgetExhausted,
    CrossingSegments,
    EmptyStructure,
    GeneralPositionViolation,
    GenerationBudgetExceeded,
    InconsistentStructure,
    InvalidHandle,
    InvalidNoiseLevel,
    NoisyGeomError,
    StructuralError,
    TooFewPoints,
)
from .noise import NoisyContext, RepetitionPlan, majority_vote, noisy_eval, repetitions_for
from .predicates import Point, Segment
from .walk import WalkConfig, run_walk, run_walk_on_tree
from .bst import OrderedTree, noisy_sort
from .trapmap import TrapezoidMap, build_trap_map
from .sweep import closest_pair, intersect_segments
from .hull import convex_hull_2d
from .delaunay import build_delaunay, emst

__version__ = "0.1.0"
