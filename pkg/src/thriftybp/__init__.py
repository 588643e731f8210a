"""Thrifty branching programs, black pebbling and incremental programs for GEN."""

from .bp import NO, YES, BranchingProgram, Func, Leaf, run, size, validate_bp
from .dag import RootedDag, make_complete_binary_tree, make_path, make_pyramid, validate_dag
from .dageval import DagEvalInstance, decide, enumerate_hard_inputs, node_value, node_values
from .genprob import GenInstance, closure, decide_gen
from .pebbling import is_valid_complete_sequence, min_pebbling_cost, sequence_cost
from .reduction import build_naming, classify_variable, reduce_instance

__all__ = [
    "NO", "YES", "BranchingProgram", "Func", "Leaf", "run", "size", "validate_bp",
    "RootedDag", "make_complete_binary_tree", "make_path", "make_pyramid", "validate_dag",
    "DagEvalInstance", "decide", "enumerate_hard_inputs", "node_value", "node_values",
    "GenInstance", "closure", "decide_gen",
    "is_valid_complete_sequence", "min_pebbling_cost", "sequence_cost",
    "build_naming", "classify_variable", "reduce_instance",
]
