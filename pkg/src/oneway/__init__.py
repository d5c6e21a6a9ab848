"""Simulator for the one-way quantum computer: cluster states, measurement patterns, feed-forward."""

from oneway.circuit import CNOT, H, ROT, S, Circuit, Gate
from oneway.compiler import CompiledPattern, compile
from oneway.scheduler import Schedule, build_schedule

__all__ = ["CNOT", "H", "ROT", "S", "Circuit", "Gate", "CompiledPattern", "compile", "Schedule",
           "build_schedule"]
