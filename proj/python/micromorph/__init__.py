"""Python interface to the micromorph homogenisation library."""

from pathlib import Path

from ._core import (
    ConvergenceError,
    DomainError,
    MLOptions,
    MLRegime,
    NumericalError,
    ValidationError,
    construct,
    diff_documents,
    e_alpha,
    mittag_leffler,
    modal_solution,
    run,
    thin_layer_spectrum,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "MLOptions",
    "MLRegime",
    "NumericalError",
    "ValidationError",
    "construct",
    "construct_file",
    "diff_documents",
    "e_alpha",
    "mittag_leffler",
    "modal_solution",
    "run",
    "run_file",
    "thin_layer_spectrum",
]


def run_file(command, path, overrides=()):
    """Run a subcommand on a config file; returns (exit_code, stdout, stderr)."""
    path = Path(path)
    return run(command, path.read_text(), list(overrides), str(path))


def construct_file(path, overrides=()):
    path = Path(path)
    return construct(path.read_text(), list(overrides), str(path))
