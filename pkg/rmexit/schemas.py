from fractions import Fraction
from math import comb, factorial
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

Number = Union[int, float, Fraction]


class RmParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0)
    r: int = Field(ge=0)

    @model_validator(mode="after")
    def _order_within_n(self) -> "RmParams":
        if self.r > self.n:
            raise ValueError(f"order r={self.r} exceeds n={self.n}")
        return self

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def K(self) -> int:
        return sum(comb(self.n, i) for i in range(self.r + 1))

    @property
    def d(self) -> int:
        return 1 << (self.n - self.r)

    @property
    def label(self) -> str:
        return f"RM({self.n},{self.r})"


class SequenceMember(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: RmParams
    rate: Fraction
    gap: Fraction

    @field_serializer("rate", "gap")
    def _fraction_text(self, value: Fraction) -> str:
        return str(value)


class CodeSequence(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    target_rate: Fraction
    members: List[SequenceMember] = Field(default_factory=list)

    @field_serializer("target_rate")
    def _fraction_text(self, value: Fraction) -> str:
        return str(value)


class CodeInfo(BaseModel):
    label: str
    N: int
    K: int
    d: Optional[int] = None
    d_method: str
    rate: str


class ExitPolynomial(BaseModel):
    """Exact weight profile of Ω_i: h(ε) = Σ_w A_w ε^w (1−ε)^(N−1−w) / denominator.

    ``focus`` is the bit index, or None for an average over bits (then
    ``denominator`` is the number of bits summed).
    """

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=1)
    focus: Optional[int] = None
    weights: Tuple[int, ...]
    denominator: int = Field(default=1, ge=1)
    label: str = ""

    @model_validator(mode="after")
    def _weights_fit_patterns(self) -> "ExitPolynomial":
        if len(self.weights) != self.N:
            raise ValueError(f"expected {self.N} weights, got {len(self.weights)}")
        for w, a in enumerate(self.weights):
            if not 0 <= a <= self.denominator * comb(self.N - 1, w):
                raise ValueError(f"A_{w}={a} outside [0, C({self.N - 1},{w})]")
        return self

    def evaluate(self, eps: Any) -> Any:
        """h(ε); exact Fraction for int/Fraction input, float otherwise."""
        m = self.N - 1
        total = sum(a * eps**w * (1 - eps) ** (m - w) for w, a in enumerate(self.weights) if a)
        if isinstance(eps, (int, Fraction)):
            return Fraction(total) / self.denominator
        return total / self.denominator

    def evaluate_grid(self, grid: Any) -> np.ndarray:
        return np.array([float(self.evaluate(float(x))) for x in grid], dtype=float)

    def normalized_profile(self) -> List[Fraction]:
        m = self.N - 1
        return [Fraction(a, self.denominator * comb(m, w)) for w, a in enumerate(self.weights)]

    def area(self) -> Fraction:
        m = self.N - 1
        total = sum(a * factorial(w) * factorial(m - w) for w, a in enumerate(self.weights))
        return Fraction(total, factorial(self.N) * self.denominator)

    def to_payload(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"N": self.N, "i": self.focus, "A": [str(a) for a in self.weights]}
        if self.denominator != 1:
            payload["denominator"] = str(self.denominator)
        return payload

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "ExitPolynomial":
        return cls(
            N=int(payload["N"]),
            focus=payload.get("i"),
            weights=tuple(int(a) for a in payload["A"]),
            denominator=int(payload.get("denominator", 1)),
        )


class ExitPoint(BaseModel):
    epsilon: float = Field(ge=0.0, le=1.0)
    h: float = Field(ge=0.0, le=1.0)
    half_width: float = Field(ge=0.0)
    trials: int = Field(ge=0)


class ExitCurve(BaseModel):
    label: str
    focus: str
    N: int
    rate: str
    seed: Optional[int] = None
    points: List[ExitPoint] = Field(default_factory=list)

    @field_validator("points")
    @classmethod
    def _grid_increasing(cls, points: List[ExitPoint]) -> List[ExitPoint]:
        eps = [p.epsilon for p in points]
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilon grid must be strictly increasing")
        return points

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([p.epsilon for p in self.points], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.h for p in self.points], dtype=float)

    @property
    def trial_counts(self) -> np.ndarray:
        return np.array([p.trials for p in self.points], dtype=float)


class CheckResult(BaseModel):
    name: str
    passed: bool
    expected: Optional[str] = None
    actual: Optional[str] = None
    detail: Optional[str] = None


class VerifyReport(BaseModel):
    label: str
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


class ThresholdReport(BaseModel):
    label: str
    delta: float = Field(gt=0.0, lt=0.5)
    N: int
    rate: str
    capacity: float
    eps_lower: Optional[float] = None
    eps_mid: Optional[float] = None
    eps_upper: Optional[float] = None
    width: Optional[float] = None
    gap_bound: Optional[float] = None

    @model_validator(mode="after")
    def _crossings_ordered(self) -> "ThresholdReport":
        crossings = [self.eps_lower, self.eps_mid, self.eps_upper]
        if all(x is not None for x in crossings):
            lo, mid, hi = crossings
            if not (0.0 <= lo <= mid + 1e-9 and mid <= hi + 1e-9 and hi <= 1.0):
                raise ValueError(f"crossings out of order: {crossings}")
        return self


class BoundParams(BaseModel):
    c: float = Field(default=1.0, gt=0.0)
    delta: float = Field(gt=0.0, lt=0.5)
    delta_n: float = Field(default=0.0, ge=0.0)
    N: int = Field(ge=3)
    R: float = Field(gt=0.0, lt=1.0)


class ConstantFit(BaseModel):
    c: float
    delta: float
    xs: List[float]
    widths: List[float]
    residuals: List[float]
    labels: List[str] = Field(default_factory=list)


class RunConfig(BaseModel):
    codes: List[str] = Field(default_factory=list)
    eps_grid: str = "0:1:33"
    trials: int = Field(default=10000, ge=1)
    seed: int = Field(default=0, ge=0)
    deltas: List[float] = Field(default_factory=lambda: [0.1])
    out: str = "runs/latest"
    workers: int = Field(default=1, ge=1)
    exact: bool = False
    focus: str = "average"
    block: bool = False
    c: float = Field(default=1.0, gt=0.0)
    quads: int = Field(default=1000, ge=1)

    @field_validator("eps_grid")
    @classmethod
    def _grid_parses(cls, value: str) -> str:
        parse_grid(value)
        return value

    @field_validator("deltas")
    @classmethod
    def _deltas_in_range(cls, values: List[float]) -> List[float]:
        for delta in values:
            if not 0.0 < delta < 0.5:
                raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
        return values

    @field_validator("focus")
    @classmethod
    def _focus_known(cls, value: str) -> str:
        if value != "average" and not value.isdigit():
            raise ValueError(f"focus must be 'average' or a bit index, got {value!r}")
        return value

    def grid(self) -> List[float]:
        return parse_grid(self.eps_grid)

    def echo(self) -> Dict[str, Any]:
        """Config as recorded in manifests; the worker count never changes outputs."""
        return self.model_dump(mode="json", exclude={"workers"})


class ManifestEntry(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    config: Dict[str, Any]
    version: str
    wall_time_s: float
    files: List[ManifestEntry] = Field(default_factory=list)
    action_log: List[str] = Field(default_factory=list)


class RunResult(BaseModel):
    out_dir: str
    files: List[ManifestEntry] = Field(default_factory=list)
    action_log: List[str] = Field(default_factory=list)
    failures: List[str] = Field(default_factory=list)
    passed: bool = True


def parse_grid(spec: str) -> List[float]:
    """Parse ``lo:hi:steps`` into evenly spaced points inside [0, 1]."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like lo:hi:steps, got {spec!r}")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
        raise ValueError(f"grid {spec!r} leaves [0, 1]")
    if steps < 1 or (steps == 1 and lo != hi) or (steps > 1 and not lo < hi):
        raise ValueError(f"grid {spec!r} is empty or not increasing")
    return [float(x) for x in np.linspace(lo, hi, steps)]
