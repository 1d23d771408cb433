"""log-RAM: a word-RAM simulator with unit and depth cost accounting, plus
program generators for integer multiplication."""

from .isa import MachineConfig, Program
from .asm import assemble, disassemble
from .vm import load, run, step, read_output

__all__ = ["MachineConfig", "Program", "assemble", "disassemble", "load", "run", "step",
           "read_output"]
__version__ = "0.1.0"
