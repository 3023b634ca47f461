"""Numeric defaults shared by the CLI and the numeric checks.

Every field can be overridden by an environment variable ``PFORGE_<NAME>``
(upper case) and, for the CLI, by the matching flag.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional

ENV_PREFIX = "PFORGE_"


@dataclass(frozen=True)
class Settings:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_norm: float = 1e8
    drift_tol: float = 1e-8
    commutation_tol: float = 1e-6
    backlund_tol: float = 1e-4
    backlund_h: float = 1e-3
    exp_tol: float = 1e-8

    @classmethod
    def from_env(cls, env: Optional[Mapping[str, str]] = None) -> "Settings":
        """Defaults with ``PFORGE_*`` overrides applied."""
        env = os.environ if env is None else env
        values = {}
        for f in fields(cls):
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is not None and raw.strip():
                try:
                    values[f.name] = float(raw)
                except ValueError:
                    raise ValueError(f"{ENV_PREFIX}{f.name.upper()}={raw!r} is not a number") from None
        return cls(**values)

    def updated(self, **overrides) -> "Settings":
        """Copy with the non-``None`` overrides applied."""
        return replace(self, **{k: float(v) for k, v in overrides.items() if v is not None})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
