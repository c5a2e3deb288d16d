"""Symbolic toolkit for sociable interfaces: compose, refine, check safety."""
from .bdd import BDDError, BitVar, Function, Manager
from .composition import (
    CompositionError, IncompatibleError, build_composite, compatible_states, compose, product,
)
from .game import Arena, Player, attr_output, extract_trace, pre, reachable, win_safe
from .model import (
    ActionSpec, Domain, GuardedCommand, Interface, ValidationError, VarDecl,
    enumerate_explicit, validate,
)
from .parser import ParseError, parse, parse_expr, pretty_print
from .refinement import RefinementError, alt_sim, refines
from .safety import check_optimistic, check_pessimistic, well_formed
from .symbolic import NOT_LISTENING, SymbolicInterface, compile_interface


def load(text: str, file: str = "<input>") -> dict[str, Interface]:
    """Parse and validate every module of a ``.si`` text, keyed by name."""
    return {m.name: validate(m) for m in parse(text, file)}
