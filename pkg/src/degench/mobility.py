"""Degenerate mobility variants of the Cahn-Hilliard flux."""

from __future__ import annotations

from enum import Enum

import numpy as np


class MobilityKind(Enum):
    """Mobility M(u) of the flux j = -M(u) grad(mu).

    All three variants vanish at u = +-1; they differ in how the degeneracy
    is approached and in whether M stays positive for |u| > 1.
    """

    QUADRATIC_POSITIVE_PART = "quad-pos"   # max(1 - u^2, 0)
    ABSOLUTE_VALUE = "abs"                 # |1 - u^2|
    BIQUADRATIC_POSITIVE_PART = "biquad"   # max(1 - u^2, 0)^2

    def __call__(self, u):
        s = 1.0 - np.asarray(u, dtype=float) ** 2
        if self is MobilityKind.QUADRATIC_POSITIVE_PART:
            return np.maximum(s, 0.0)
        if self is MobilityKind.ABSOLUTE_VALUE:
            return np.abs(s)
        return np.maximum(s, 0.0) ** 2

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "MobilityKind":
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "quad-pos": cls.QUADRATIC_POSITIVE_PART,
            "quadratic-positive-part": cls.QUADRATIC_POSITIVE_PART,
            "abs": cls.ABSOLUTE_VALUE,
            "absolute-value": cls.ABSOLUTE_VALUE,
            "biquad": cls.BIQUADRATIC_POSITIVE_PART,
            "biquadratic-positive-part": cls.BIQUADRATIC_POSITIVE_PART,
        }
        if key not in aliases:
            raise ValueError(
                f"unknown mobility {text!r}; expected one of "
                "quad-pos | abs | biquad"
            )
        return aliases[key]
