"""Finite-level computations for C*-algebras of automaton groups."""

from .algebra import AlgebraElement
from .automaton_io import load_automaton, load_fixture
from .wreath_core import Automaton, Permutation, validate_automaton

__all__ = [
    "AlgebraElement",
    "Automaton",
    "Permutation",
    "load_automaton",
    "load_fixture",
    "validate_automaton",
]
