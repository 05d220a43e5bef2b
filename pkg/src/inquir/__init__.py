"""InQuIR toolchain: parser, runtime, compiler frontend, cost analyzer, linter."""

from .ast import System, Process, system_to_json, system_from_json
from .parser import parse_program
from .printer import print_program

__version__ = "0.1.0"

__all__ = [
    "System", "Process", "parse_program", "print_program",
    "system_to_json", "system_from_json", "__version__",
]
