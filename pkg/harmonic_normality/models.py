"""
Data models for the harmonic normality toolkit.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class Verdict(Enum):
    """Evidence classes for sup traces."""
    BOUNDED = "BoundedEvidence"
    GROWTH = "GrowthEvidence"
    INCONCLUSIVE = "Inconclusive"
    NO_PREIMAGES = "NoPreimages"


class ProbeVerdict(Enum):
    """Outcome of a sampled check."""
    PASS = "PASS"
    FAIL = "FAIL"


class Multiplicity(Enum):
    """Zero order classes decided by vanishing derivatives."""
    SIMPLE = "1"
    DOUBLE = "2"
    AT_LEAST_THREE = "atleast3"

    @property
    def order(self) -> int:
        return {"1": 1, "2": 2, "atleast3": 3}[self.value]


class ScanMode(Enum):
    """Exceptional-value scan modes."""
    ALL_MULTIPLE = "all_multiple"
    ALL_AT_LEAST_THREE = "all_atleast3"


def complex_pair(z: Optional[complex]) -> Optional[List[float]]:
    """JSON-friendly [re, im] pair."""
    if z is None:
        return None
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class Disc:
    """Closed disc {|z - center| <= radius}."""
    center: complex
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("disc radius must be positive")


@dataclass(frozen=True)
class Cell:
    """Axis-aligned square cell of the preimage quadtree."""
    center: complex
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("cell half-width must be positive")

    def children(self) -> List["Cell"]:
        """Quadrants in fixed order: SW, SE, NW, NE."""
        q = self.half_width / 2
        return [Cell(self.center + complex(dx, dy), q)
                for dy in (-q, q) for dx in (-q, q)]

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        w = self.half_width + slack
        return (abs(z.real - self.center.real) <= w
                and abs(z.imag - self.center.imag) <= w)

    def encloses(self, other: "Cell") -> bool:
        d = other.center - self.center
        reach = self.half_width - other.half_width
        return abs(d.real) <= reach and abs(d.imag) <= reach


@dataclass
class PointReport:
    """Pointwise invariants of a harmonic map."""
    z: complex
    f_value: complex
    fsharp: float
    jacobian: float
    dilatation: Optional[complex]
    second_quantity: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z": complex_pair(self.z),
            "f_value": complex_pair(self.f_value),
            "fsharp": self.fsharp,
            "jacobian": self.jacobian,
            "dilatation": complex_pair(self.dilatation),
            "second_quantity": self.second_quantity,
        }


@dataclass
class SenseReport:
    """Evidence from sense_preserving_probe."""
    min_jacobian: float
    argmin: complex
    verdict: ProbeVerdict
    samples: int
    degenerate_only: bool = False

    @property
    def acceptable(self) -> bool:
        """PASS, or failures caused only by isolated critical points."""
        return self.verdict is ProbeVerdict.PASS or self.degenerate_only

    def to_dict(self) -> Dict[str, Any]:
        return {
            "min_jacobian": self.min_jacobian,
            "argmin": complex_pair(self.argmin),
            "verdict": self.verdict.value,
            "samples": self.samples,
            "degenerate_only": self.degenerate_only,
        }


@dataclass
class SupEstimate:
    """Lower bound for sup_{|z| <= radius} f#(z)/phi(|z|)."""
    radius: float
    value: float
    argmax: complex
    refinement_depth: int
    evaluations: int
    skipped_singular: int = 0
    overflow_count: int = 0

    @property
    def overflow_witnessed(self) -> bool:
        return self.overflow_count > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "radius": self.radius,
            "value": self.value,
            "argmax": complex_pair(self.argmax),
            "refinement_depth": self.refinement_depth,
            "evaluations": self.evaluations,
            "skipped_singular": self.skipped_singular,
            "overflow_count": self.overflow_count,
        }

    def csv_row(self) -> List[Any]:
        return [repr(self.radius), repr(self.value), repr(self.argmax.real),
                repr(self.argmax.imag), self.evaluations]


@dataclass
class NormalityVerdict:
    """Classification of a sup trace along a radius schedule."""
    kind: Verdict
    sup_trace: List[SupEstimate]
    growth_exponent: Optional[float]
    overflow_witnessed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        from .analysis.normality import BOUNDED_RATIO, GROWTH_SLOPE

        return {
            "kind": self.kind.value,
            "growth_exponent": self.growth_exponent,
            "overflow_witnessed": self.overflow_witnessed,
            "sup_trace": [s.to_dict() for s in self.sup_trace],
            "conventions": {"growth_slope": GROWTH_SLOPE, "bounded_ratio": BOUNDED_RATIO},
        }


@dataclass
class RescalingEntry:
    """One step of the rescaling construction."""
    r_n: float
    z_n: complex
    M_n: float
    rho_n: float
    R_n: float

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["z_n"] = complex_pair(self.z_n)
        return d


@dataclass
class RescalingSequence:
    """Data (r_n, z_n, M_n, rho_n, R_n) extracted along a schedule."""
    entries: List[RescalingEntry] = field(default_factory=list)
    radius_divergent: bool = False
    rho_to_zero: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "radius_divergent": self.radius_divergent,
            "rho_to_zero": self.rho_to_zero,
        }

    def csv_rows(self) -> List[List[Any]]:
        return [[n, repr(e.r_n), repr(e.z_n.real), repr(e.z_n.imag), repr(e.M_n),
                 repr(e.rho_n), repr(e.R_n)]
                for n, e in enumerate(self.entries, 1)]


@dataclass
class PreimageRoot:
    """A located solution of f(z) = a."""
    location: complex
    multiplicity: Multiplicity
    residual: float
    local_degree: int

    @property
    def degree_agrees(self) -> bool:
        return self.local_degree == self.multiplicity.order or (
            self.multiplicity is Multiplicity.AT_LEAST_THREE and self.local_degree >= 3)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "location": complex_pair(self.location),
            "multiplicity": self.multiplicity.value,
            "residual": self.residual,
            "local_degree": self.local_degree,
            "degree_agrees": self.degree_agrees,
        }


@dataclass
class PreimageSet:
    """Solutions of f(z) = a inside a disc."""
    target: complex
    region: Disc
    roots: List[PreimageRoot] = field(default_factory=list)
    unresolved_cells: List[Cell] = field(default_factory=list)
    boundary_excluded: int = 0
    overflow_cells: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": complex_pair(self.target),
            "region": {"center": complex_pair(self.region.center),
                       "radius": self.region.radius},
            "roots": [r.to_dict() for r in self.roots],
            "unresolved_cells": [{"center": complex_pair(c.center),
                                  "half_width": c.half_width}
                                 for c in self.unresolved_cells],
            "boundary_excluded": self.boundary_excluded,
            "overflow_cells": self.overflow_cells,
        }

    def csv_rows(self) -> List[List[Any]]:
        return [[repr(self.target.real), repr(self.target.imag), repr(r.location.real),
                 repr(r.location.imag), r.multiplicity.value, repr(r.residual),
                 r.local_degree]
                for r in self.roots]


@dataclass
class ValueTrace:
    """Criterion statistics for one target value at one radius."""
    value: complex
    radius: float
    preimage_count: int
    sup_ratio: float
    sup_second: Optional[float]
    preimages: List[complex] = field(default_factory=list)
    boundary_excluded: int = 0
    unresolved_cells: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": complex_pair(self.value),
            "radius": self.radius,
            "preimage_count": self.preimage_count,
            "sup_ratio": self.sup_ratio,
            "sup_second": self.sup_second,
            "preimages": [complex_pair(z) for z in self.preimages],
            "boundary_excluded": self.boundary_excluded,
            "unresolved_cells": self.unresolved_cells,
        }


@dataclass
class CriterionReport:
    """Outcome of a five-point or four-point check."""
    E: List[complex]
    radii: List[float]
    per_value: List[ValueTrace]
    sup1: float
    sup2: Optional[float]
    verdict: Verdict
    mode: str
    sup1_trace: List[float] = field(default_factory=list)
    sup2_trace: Optional[List[float]] = None
    weight_check: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "E": [complex_pair(a) for a in self.E],
            "radii": self.radii,
            "per_value": [t.to_dict() for t in self.per_value],
            "overall": {
                "sup1": self.sup1,
                "sup2": self.sup2,
                "verdict": self.verdict.value,
                "sup1_trace": self.sup1_trace,
                "sup2_trace": self.sup2_trace,
            },
            "weight_check": self.weight_check,
        }

    def csv_rows(self) -> List[List[Any]]:
        return [[repr(t.value.real), repr(t.value.imag), repr(t.radius), t.preimage_count,
                 repr(t.sup_ratio), "" if t.sup_second is None else repr(t.sup_second)]
                for t in self.per_value]
