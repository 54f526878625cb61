"""
Map file loader and command-line literal parsers.

Map file format (one key per line, '#' starts a comment line):

    h = exp(i/(1-z))
    g = 0
    z0 = 0+0i
    singularities = 1+0i, -1+0i

z0 and singularities are optional.
"""

import math
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..analysis.mapfn import HarmonicMap
from ..analysis.phi import PhiWeight
from ..config import Config
from ..errors import HarmonicNormalityError, InputError, MapFileError, WeightSpecError

_UNSIGNED = r'(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?'
_COMPLEX = re.compile(
    rf'^(?P<re>[+-]?{_UNSIGNED})(?:(?P<sign>[+-])(?P<im>{_UNSIGNED})?i)?$')
_IMAGINARY = re.compile(rf'^(?P<sign>[+-]?)(?P<im>{_UNSIGNED})?i$')
_WEIGHT = re.compile(rf'^(?P<family>inv_pow|inv_log):(?P<name>alpha|beta)=(?P<value>{_UNSIGNED})$')

REQUIRED_KEYS = ('h', 'g')
OPTIONAL_KEYS = ('z0', 'singularities')


def parse_complex_literal(text: str) -> complex:
    """Read 'a+bi', 'a-bi', 'a', 'bi' or 'i' with decimal a and b."""
    compact = text.strip().replace(' ', '')
    match = _COMPLEX.match(compact)
    if match:
        real = float(match.group('re'))
        if match.group('sign') is None:
            return complex(real, 0.0)
        imag = float(match.group('im') or '1')
        return complex(real, -imag if match.group('sign') == '-' else imag)
    match = _IMAGINARY.match(compact)
    if match:
        imag = float(match.group('im') or '1')
        return complex(0.0, -imag if match.group('sign') == '-' else imag)
    raise InputError(f"malformed complex literal {text!r}")


def format_complex_literal(z: complex) -> str:
    """Inverse of parse_complex_literal for reports."""
    sign = '-' if math.copysign(1.0, z.imag) < 0 else '+'
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_weight_spec(text: str) -> PhiWeight:
    """'classical' | 'inv_pow:alpha=<d>' | 'inv_log:beta=<d>'."""
    compact = text.strip()
    if compact == 'classical':
        return PhiWeight.classical()
    match = _WEIGHT.match(compact)
    if not match:
        raise WeightSpecError(f"unknown weight specifier {text!r}")
    family, name, value = match.group('family'), match.group('name'), float(match.group('value'))
    if family == 'inv_pow' and name == 'alpha':
        return PhiWeight.inv_pow(value)
    if family == 'inv_log' and name == 'beta':
        return PhiWeight.inv_log(value)
    raise WeightSpecError(f"{family} takes {'alpha' if family == 'inv_pow' else 'beta'}, "
                          f"not {name}")


def read_map_entries(text: str) -> Dict[str, str]:
    """Key/value pairs of a map file, with line-numbered errors."""
    entries: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        if not sep:
            raise MapFileError(f"line {number}: expected 'key = value'", key or None)
        if key not in REQUIRED_KEYS + OPTIONAL_KEYS:
            raise MapFileError(f"line {number}: unknown key {key!r}", key)
        if key in entries:
            raise MapFileError(f"line {number}: duplicate key {key!r}", key)
        entries[key] = value.strip()
    for key in REQUIRED_KEYS:
        if key not in entries:
            raise MapFileError(f"map file is missing required key '{key} ='", key)
    return entries


class MapFileLoader:
    """Builds HarmonicMap instances from map files using configured tolerances."""

    def __init__(self, config: Config):
        """Initialize loader."""
        self.config = config

    def loads(self, text: str, label: str = "") -> HarmonicMap:
        """Parse map file contents."""
        entries = read_map_entries(text)
        z0 = parse_complex_literal(entries['z0']) if 'z0' in entries else 0j
        singularities: Tuple[complex, ...] = ()
        if entries.get('singularities'):
            singularities = tuple(parse_complex_literal(item)
                                  for item in entries['singularities'].split(','))
        try:
            return HarmonicMap.from_text(
                entries['h'], entries['g'], z0=z0,
                label=label or f"h={entries['h']}, g={entries['g']}",
                singularities=singularities,
                singularity_tol=self.config.singularity_tol,
                overflow_guard=self.config.overflow_guard,
                dilatation_tol=self.config.dilatation_tol,
            )
        except InputError:
            raise
        except HarmonicNormalityError as e:
            # evaluation failures at z0 still mean the file is unusable
            raise MapFileError(f"map cannot be normalised at z0: {e}", 'z0') from e

    def load(self, path: Union[str, Path]) -> HarmonicMap:
        """Read and parse a map file."""
        path = Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as e:
            raise MapFileError(f"cannot read map file {str(path)!r}: {e.strerror}") from e
        return self.loads(text, label=path.stem)


def parse_targets(items: Optional[List[str]]) -> List[complex]:
    """Complex literals from repeated --target flags."""
    return [parse_complex_literal(item) for item in items or []]
