"""JSON instance files.

Schema::

    {"budget": 3.0, "inspectors": 1,
     "booths": [{"cost": {"type": "power", "coef": 1.0, "exp": 2.0},
                 "stats": {"mu": 0.0, "sigma": 1.0, "weight": 1.0, "population": 1.0},
                 "win_curve": {"type": "gaussian_gain"}}, ...]}

``stats`` and ``win_curve`` are optional. A ``gaussian_gain`` curve takes
``mu``/``sigma`` from the booth's ``stats`` unless given explicitly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .costs import PowerCost
from .errors import InvalidArgument
from .model import BoothStatistics, GameInstance
from .parliamentary import ExpSaturationCurve, GaussianGainCurve


class InstanceError(InvalidArgument):
    """Instance file could not be read; the message names the offending field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PowerCostSpec(_Strict):
    type: Literal["power"]
    coef: float = Field(gt=0, allow_inf_nan=False)
    exp: float = Field(gt=1, allow_inf_nan=False)


class StatsSpec(_Strict):
    mu: float = Field(allow_inf_nan=False)
    sigma: float = Field(gt=0, allow_inf_nan=False)
    weight: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    population: float = Field(default=1.0, gt=0, allow_inf_nan=False)


class GaussianGainSpec(_Strict):
    type: Literal["gaussian_gain"]
    mu: Optional[float] = Field(default=None, allow_inf_nan=False)
    sigma: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)


class ExpSaturationSpec(_Strict):
    type: Literal["exp_saturation"]
    cap: float = Field(gt=0, allow_inf_nan=False)
    scale: float = Field(gt=0, allow_inf_nan=False)


WinCurveSpec = Annotated[Union[GaussianGainSpec, ExpSaturationSpec], Field(discriminator="type")]


class BoothSpec(_Strict):
    cost: PowerCostSpec
    stats: Optional[StatsSpec] = None
    win_curve: Optional[WinCurveSpec] = None

    @model_validator(mode="after")
    def _curve_needs_stats(self):
        wc = self.win_curve
        if isinstance(wc, GaussianGainSpec) and self.stats is None and (wc.mu is None or wc.sigma is None):
            raise ValueError("gaussian_gain curve needs mu and sigma, either inline or from stats")
        return self


class InstanceDocument(_Strict):
    booths: list[BoothSpec] = Field(min_length=2)
    budget: float = Field(gt=0, allow_inf_nan=False)
    inspectors: int = Field(ge=0)

    @model_validator(mode="after")
    def _fewer_inspectors_than_booths(self):
        if self.inspectors >= len(self.booths):
            raise ValueError(f"inspectors must be smaller than the number of booths ({len(self.booths)})")
        return self

    def game(self, budget: float | None = None, inspectors: int | None = None) -> GameInstance:
        costs = [PowerCost(b.cost.coef, b.cost.exp) for b in self.booths]
        return GameInstance(
            costs,
            self.budget if budget is None else budget,
            self.inspectors if inspectors is None else inspectors,
        )

    @property
    def has_stats(self) -> bool:
        return all(b.stats is not None for b in self.booths)

    def booth_stats(self) -> list[BoothStatistics] | None:
        if not self.has_stats:
            return None
        return [BoothStatistics(**b.stats.model_dump()) for b in self.booths]

    def win_curves(self) -> list:
        """One curve per booth; booths without one get a Gaussian gain from their stats."""
        out = []
        for i, b in enumerate(self.booths):
            wc = b.win_curve
            if isinstance(wc, ExpSaturationSpec):
                out.append(ExpSaturationCurve(wc.cap, wc.scale))
                continue
            mu = wc.mu if wc is not None and wc.mu is not None else (b.stats.mu if b.stats else None)
            sigma = wc.sigma if wc is not None and wc.sigma is not None else (b.stats.sigma if b.stats else None)
            if mu is None or sigma is None:
                raise InstanceError(f"booths[{i}]: no win_curve and no stats to derive one")
            out.append(GaussianGainCurve(mu, sigma))
        return out

    def to_json(self) -> str:
        return json.dumps(self.model_dump(exclude_none=True), indent=2) + "\n"


def _where(loc) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        elif part in ("gaussian_gain", "exp_saturation"):
            continue  # discriminator tag, not a field
        else:
            out += f".{part}" if out else str(part)
    return out or "<root>"


def parse_instance(data) -> InstanceDocument:
    try:
        return InstanceDocument.model_validate(data)
    except ValidationError as exc:
        msgs = [f"{_where(e['loc'])}: {e['msg']}" for e in exc.errors()]
        raise InstanceError("; ".join(msgs)) from None


def load_instance(path) -> InstanceDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_instance(data)
