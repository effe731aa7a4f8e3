"""Variable declarations for a study."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from faircause.exceptions import ConfigError, ParseError, SchemaError
from faircause.settings import NEUTRAL_BAND


class VariableKind(str, Enum):
    """Whether a column is set by the user or observed."""

    INTERVENTIONAL = "interventional"
    OBSERVATIONAL = "observational"


class Objective(str, Enum):
    """Direction in which a metric improves."""

    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"
    TARGET = "target"


class Tier(str, Enum):
    """Pipeline stage a variable belongs to."""

    DATA = "data"
    TRAIN = "train"
    TEST = "test"
    HYPER = "hyper"

    @property
    def rank(self) -> int:
        """Position in the pipeline; edges never point to a lower rank."""
        return {Tier.HYPER: 0, Tier.DATA: 0, Tier.TRAIN: 1, Tier.TEST: 2}[self]


@dataclass(frozen=True)
class SignSpec:
    """How changes of a metric are judged."""

    objective: Objective = Objective.MAXIMIZE
    target: Optional[float] = None
    neutral_band: float = NEUTRAL_BAND

    def __post_init__(self) -> None:
        if self.objective is Objective.TARGET:
            if self.target is None or not math.isfinite(self.target):
                raise ConfigError("target objective requires a finite value")
        if not self.neutral_band >= 0:
            raise ConfigError(f"neutral band must be >= 0, got {self.neutral_band}")

    @classmethod
    def maximize(cls) -> SignSpec:
        """Higher is better."""
        return cls(Objective.MAXIMIZE)

    @classmethod
    def minimize(cls) -> SignSpec:
        """Lower is better."""
        return cls(Objective.MINIMIZE)

    @classmethod
    def towards(cls, target: float) -> SignSpec:
        """Closer to `target` is better."""
        return cls(Objective.TARGET, target=target)

    def to_dict(self) -> dict[str, Any]:
        """Study-config representation."""
        doc: dict[str, Any] = {"objective": self.objective.value}
        if self.objective is Objective.TARGET:
            doc["value"] = self.target
        if self.neutral_band != NEUTRAL_BAND:
            doc["neutral_band"] = self.neutral_band
        return doc


@dataclass(frozen=True)
class VariableSpec:
    """Declaration of one study column."""

    name: str
    kind: VariableKind = VariableKind.OBSERVATIONAL
    sign: SignSpec = field(default_factory=SignSpec)
    tier: Optional[Tier] = None

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError(f"variable name must be a nonempty string, got {self.name!r}")

    @property
    def is_interventional(self) -> bool:
        """Whether this is a method ratio."""
        return self.kind is VariableKind.INTERVENTIONAL

    def to_dict(self) -> dict[str, Any]:
        """Study-config representation."""
        doc: dict[str, Any] = {
            "name": self.name,
            "kind": self.kind.value,
            "sign": self.sign.to_dict(),
        }
        if self.tier is not None:
            doc["tier"] = self.tier.value
        return doc


VariableLike = Union[VariableSpec, str]


def as_specs(variables: Sequence[VariableLike]) -> tuple[VariableSpec, ...]:
    """Normalize names to observational specs and check uniqueness."""
    specs = tuple(v if isinstance(v, VariableSpec) else VariableSpec(v) for v in variables)
    seen: set[str] = set()
    for spec in specs:
        if spec.name in seen:
            raise SchemaError(f"duplicate variable {spec.name!r}")
        seen.add(spec.name)
    return specs


def _enum(kind: type[Enum], value: Any, what: str) -> Any:
    try:
        return kind(value)
    except ValueError:
        allowed = ", ".join(m.value for m in kind)  # type: ignore[attr-defined]
        raise ConfigError(f"{what} must be one of {allowed}, got {value!r}") from None


def sign_from_dict(doc: dict[str, Any]) -> SignSpec:
    """Parse a sign block of the study config."""
    objective = _enum(Objective, doc.get("objective", "maximize"), "sign.objective")
    value = doc.get("value")
    band = doc.get("neutral_band", NEUTRAL_BAND)
    return SignSpec(objective, target=None if value is None else float(value), neutral_band=float(band))


def spec_from_dict(doc: dict[str, Any]) -> VariableSpec:
    """Parse one entry of the study config `variables` list."""
    if "name" not in doc:
        raise ConfigError("variable entry without a name")
    tier = doc.get("tier")
    return VariableSpec(
        name=doc["name"],
        kind=_enum(VariableKind, doc.get("kind", "observational"), "kind"),
        sign=sign_from_dict(doc.get("sign", {})),
        tier=None if tier is None else _enum(Tier, tier, "tier"),
    )


def load_study(config_path: Union[str, Path]) -> tuple[VariableSpec, ...]:
    """Read the variable declarations of a study.

    Args:
        config_path: JSON document `{"variables": [...]}`.

    Returns:
        The declared variables in config order.
    """
    source = str(config_path)
    try:
        document = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}", source=source) from e
    except OSError as e:
        raise ParseError(f"cannot read study config: {e}", source=source) from e

    try:
        variables = document["variables"]
        specs = as_specs([spec_from_dict(v) for v in variables])
    except (KeyError, TypeError) as e:
        raise SchemaError(f"malformed study config: {e}", source=source) from e
    except ConfigError as e:
        raise ConfigError(e.message, source=source) from e
    except SchemaError as e:
        raise SchemaError(e.message, source=source) from e
    if not specs:
        raise SchemaError("study declares no variables", source=source)
    return specs


def study_to_dict(specs: Sequence[VariableSpec]) -> dict[str, Any]:
    """Inverse of `load_study` for writing config files."""
    return {"variables": [s.to_dict() for s in specs]}
