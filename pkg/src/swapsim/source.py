"""Photon-pair source and the two station beam splitters."""

from __future__ import annotations

from .fock import CUTOFF, FockState, tensor
from .optics import HALF, BeamSplitter, OpticalCircuit

A, A_P, B, B_P = "A", "A'", "B", "B'"
AB_MODES = (A, B)
EVE_MODES = (A_P, B_P)
ALL_MODES = (A, A_P, B, B_P)


def product_pair(cutoff: int = CUTOFF) -> FockState:
    """One photon in each station input, ``|1>_A (x) |1>_B``, with empty partner modes."""
    return tensor(
        FockState.basis({A: 1, A_P: 0}, cutoff),
        FockState.basis({B: 1, B_P: 0}, cutoff),
    )


def station_circuit(t: float = HALF) -> OpticalCircuit:
    return OpticalCircuit(
        ALL_MODES,
        (BeamSplitter.from_transmittivity(A, A_P, t), BeamSplitter.from_transmittivity(B, B_P, t)),
    )


def prepare_source(t: float = HALF, cutoff: int = CUTOFF) -> FockState:
    """Two-photon product state after the station splitters.

    At ``t = 2**-0.5`` this is the product of the two mode singlets on
    ``(A, A')`` and ``(B, B')``.
    """
    return station_circuit(t).apply(product_pair(cutoff))
