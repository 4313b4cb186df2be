"""Built-in networks: the 8-node benchmark and the bundled transmission cases."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .graph import Network
from .matpower import CaseData, dc_laplacian, parse_case

__all__ = ["synthetic8", "builtin_case_names", "load_case", "load_case_network"]

# 3-regular: an 8-cycle plus four chords, unit weights.  Contains the three
# pairs removed in the benchmark change scenario: (2,3), (1,4), (5,7).
_SYNTHETIC8_EDGES = (
    (1, 2, 1.0),
    (2, 3, 1.0),
    (3, 4, 1.0),
    (4, 5, 1.0),
    (5, 6, 1.0),
    (6, 7, 1.0),
    (7, 8, 1.0),
    (8, 1, 1.0),
    (1, 4, 1.0),
    (2, 6, 1.0),
    (3, 8, 1.0),
    (5, 7, 1.0),
)

_CASES = {"ieee57": "case57", "ieee118": "case118", "ieee145": "case145"}


def synthetic8() -> Network:
    """The 8-node, 12-edge benchmark network."""
    return Network(8, _SYNTHETIC8_EDGES)


def builtin_case_names() -> tuple[str, ...]:
    return tuple(_CASES)


def load_case(name: str) -> CaseData:
    """Parse one of the bundled case files: ieee57, ieee118 or ieee145."""
    key = name.lower()
    if key not in _CASES:
        raise KeyError(f"unknown builtin case {name!r}; have {sorted(_CASES)}")
    text = resources.files("lapdiff.cases").joinpath(f"{_CASES[key]}.m").read_text()
    return parse_case(text)


def load_case_network(name: str) -> tuple[Network, np.ndarray, dict[int, int]]:
    """DC network, Laplacian and bus renumbering map of a bundled case."""
    return dc_laplacian(load_case(name))
