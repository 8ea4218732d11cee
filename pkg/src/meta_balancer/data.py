"""Core input containers: study summary rows and MR variant panels.

A StudySet is the universal meta-analysis input: an ordered list of
(effect estimate, standard error) rows with string identifiers.  An
MRDataset holds per-variant gene-exposure / gene-outcome associations and
converts to a StudySet of Wald ratios (see :mod:`meta_balancer.mr`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Study:
    """One summary row: effect estimate y with standard error se.

    ``n`` is the optional sample size used by the 1/n precision metric.
    ``included`` marks the row for sensitivity exclusion; excluded rows
    stay in the set but contribute nothing to any estimator.
    """

    id: str
    y: float
    se: float
    n: float | None = None
    included: bool = True

    def __post_init__(self):
        object.__setattr__(self, "y", _check_finite("y", self.y))
        object.__setattr__(self, "se", _check_finite("se", self.se))
        if self.se <= 0:
            raise DomainError(f"study {self.id!r}: se must be > 0, got {self.se}")
        if self.n is not None:
            object.__setattr__(self, "n", _check_finite("n", self.n))
            if self.n <= 0:
                raise DomainError(f"study {self.id!r}: n must be > 0, got {self.n}")


@dataclass(frozen=True)
class StudySet:
    """Ordered collection of studies with unique ids."""

    studies: tuple[Study, ...]

    def __post_init__(self):
        object.__setattr__(self, "studies", tuple(self.studies))
        ids = [s.id for s in self.studies]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DomainError(f"duplicate study ids: {dupes}")

    @property
    def k(self) -> int:
        """Number of included studies."""
        return sum(1 for s in self.studies if s.included)

    def included_studies(self) -> tuple[Study, ...]:
        return tuple(s for s in self.studies if s.included)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(y, se) arrays over included studies, original order."""
        inc = self.included_studies()
        y = np.array([s.y for s in inc], dtype=float)
        se = np.array([s.se for s in inc], dtype=float)
        return y, se

    def sizes(self) -> np.ndarray:
        """Sample sizes over included studies; raises if any is missing."""
        inc = self.included_studies()
        missing = [s.id for s in inc if s.n is None]
        if missing:
            raise DomainError(
                f"precision metric inv_n needs a sample size n for every study; "
                f"missing for {missing}"
            )
        return np.array([s.n for s in inc], dtype=float)

    def excluding(self, ids: set[str] | frozenset[str]) -> "StudySet":
        """Copy of the set with the named studies flagged excluded."""
        known = {s.id for s in self.studies}
        unknown = sorted(set(ids) - known)
        if unknown:
            raise DomainError(f"cannot exclude unknown study ids: {unknown}")
        return StudySet(tuple(
            replace(s, included=False) if s.id in ids else s
            for s in self.studies
        ))

    def require_k(self, minimum: int, what: str) -> None:
        if self.k < minimum:
            raise DomainError(f"{what} needs at least {minimum} included studies, "
                              f"got {self.k}")


@dataclass(frozen=True)
class MRVariant:
    """Per-variant summary associations for Mendelian randomization."""

    id: str
    mu_xg: float
    se_xg: float
    mu_yg: float
    se_yg: float

    def __post_init__(self):
        for name in ("mu_xg", "se_xg", "mu_yg", "se_yg"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        if self.se_xg <= 0:
            raise DomainError(f"variant {self.id!r}: se_xg must be > 0")
        if self.se_yg <= 0:
            raise DomainError(f"variant {self.id!r}: se_yg must be > 0")


@dataclass(frozen=True)
class MRDataset:
    """Panel of uncorrelated variants; ids unique."""

    variants: tuple[MRVariant, ...]
    oriented: bool = field(default=False, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        ids = [v.id for v in self.variants]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DomainError(f"duplicate variant ids: {dupes}")

    @property
    def k(self) -> int:
        return len(self.variants)

    def oriented_copy(self) -> "MRDataset":
        """Re-orient variants so every gene-exposure association is positive.

        Flipping a variant negates both associations, which preserves the
        Wald ratio but makes the Egger intercept well defined.  No-op on
        variants already positive; mu_xg == 0 is rejected downstream.
        """
        flipped = tuple(
            MRVariant(v.id, -v.mu_xg, v.se_xg, -v.mu_yg, v.se_yg)
            if v.mu_xg < 0 else v
            for v in self.variants
        )
        return MRDataset(flipped, oriented=True)
