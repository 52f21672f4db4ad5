"""Symport/antiport P systems with membrane separation, and a MIDSAT family built on them."""

from .cnf import CNFFormula
from .engine import StepPolicy, Verdict, apply_step, audit_recognizer_trace, check_confluence, run, run_to_halt
from .family import (
    FamilyOptions,
    build_base_sat_phase,
    build_family_system,
    build_injected_configuration,
    encode_instance,
    pairing_index,
    schedule_constants,
)
from .model import Configuration, MembraneTree, RecognizerSystem, Rule, initial_configuration, rule_length, validate_system
from .multiset import Multiset, Symbol, ms_leq, ms_sub, ms_sum, sym
from .oracle import middle_assignment, midsat_answer, satisfying_assignments
