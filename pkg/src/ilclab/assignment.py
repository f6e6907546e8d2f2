"""ILC assignments: a partial one-to-one pairing between two layers."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .constellation import SatelliteId


class ConstraintViolation(ValueError):
    """A satellite carries more than one ILC or a pair is not admissible."""


@dataclass(frozen=True)
class IlcAssignment:
    """ILCs between ``layers[0]`` and ``layers[1]`` as (flat_a, flat_b) pairs.

    ``slot`` is the snapshot the pairs were drawn for (None for a static
    assignment).  Pairs are stored sorted so equal assignments compare equal.
    """

    pairs: tuple[tuple[int, int], ...] = ()
    layers: tuple[int, int] = (0, 1)
    slot: int | None = None

    def __post_init__(self):
        norm = tuple(sorted((int(a), int(b)) for a, b in self.pairs))
        object.__setattr__(self, "pairs", norm)
        object.__setattr__(self, "layers", (int(self.layers[0]), int(self.layers[1])))

    @property
    def k(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def endpoints(self, side: int) -> list[int]:
        return [p[side] for p in self.pairs]

    def partner_map(self) -> dict[tuple[int, int], tuple[int, int]]:
        """``(layer, flat) -> (layer, flat)`` in both directions."""
        la, lb = self.layers
        out = {}
        for a, b in self.pairs:
            out[(la, a)] = (lb, b)
            out[(lb, b)] = (la, a)
        return out

    def check_disjoint(self) -> None:
        for side in (0, 1):
            dup = [n for n, c in Counter(self.endpoints(side)).items() if c > 1]
            if dup:
                raise ConstraintViolation(
                    f"layer {self.layers[side]} satellites {dup} carry more than one ILC"
                )

    def is_disjoint(self) -> bool:
        return all(len(set(self.endpoints(s))) == self.k for s in (0, 1))

    def satellite_pairs(self, sats_per_plane: tuple[int, int]) -> list[tuple[SatelliteId, SatelliteId]]:
        la, lb = self.layers
        return [
            (SatelliteId.from_flat(la, a, sats_per_plane[0]), SatelliteId.from_flat(lb, b, sats_per_plane[1]))
            for a, b in self.pairs
        ]

    def with_slot(self, slot: int | None) -> "IlcAssignment":
        return IlcAssignment(self.pairs, self.layers, slot)


def empty_assignment(layers=(0, 1), slot=None) -> IlcAssignment:
    return IlcAssignment((), layers, slot)
