"""Eigenvalue files, synthetic form families and report serialization.

File format::

    # label=<s> k=<int> convention=<lambda|e1e2> prime_bound=<int>
    2 <v1> <v2>
    3 <v1> <v2>
    ...

Under ``convention=lambda`` the values are ``lambda_F(p)`` and
``lambda_F(p^2)``; under ``e1e2`` they are the symmetric coefficients of the
local factor.  Numeric tokens are kept verbatim: ``a/b`` parses to a
Fraction, an integer literal to an int, anything else to a float.

Published tables usually list classical eigenvalues.  Pass
``classical=True`` to :func:`load` to rescale ``lambda(p^j)`` by
``p^{-j(k - 3/2)}``; this is the step most likely to go wrong when
importing real data, so it is never guessed.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DataFormatError, MissingPrimeError
from .primes import prime_sieve
from .satake import EigenformData, LocalFactor, hecke_to_local, local_lambda

CONVENTIONS = ("lambda", "e1e2")
DEFAULT_SYNTHETIC_WEIGHT = 20

_HEADER_RE = re.compile(r"^#\s*(.*)$")
_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class EigenvalueFile:
    label: str
    weight: int
    convention: str
    prime_bound: int
    rows: tuple[tuple[int, str, str], ...]

    def to_text(self) -> str:
        lines = [
            f"# label={self.label} k={self.weight} convention={self.convention} "
            f"prime_bound={self.prime_bound}"
        ]
        lines += [f"{p} {v1} {v2}" for p, v1, v2 in self.rows]
        return "\n".join(lines) + "\n"


def parse_number(token: str):
    if "/" in token:
        return Fraction(token)
    if _INT_RE.match(token):
        return int(token)
    value = float(token)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {token!r}")
    return value


def format_number(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def parse_eigenvalue_text(text: str, path=None) -> EigenvalueFile:
    lines = text.splitlines()
    header = None
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        m = _HEADER_RE.match(line)
        if m:
            if header is None and not rows:
                header = _parse_header(m.group(1), path, lineno)
            continue
        if header is None:
            raise DataFormatError("missing header line", path, lineno)
        parts = line.split()
        if len(parts) != 3:
            raise DataFormatError(f"expected 3 fields, got {len(parts)}", path, lineno)
        try:
            p = int(parts[0])
            parse_number(parts[1])
            parse_number(parts[2])
        except (ValueError, ZeroDivisionError) as exc:
            raise DataFormatError(f"malformed row: {exc}", path, lineno) from None
        if rows and p <= rows[-1][0]:
            raise DataFormatError(f"primes not increasing at {p}", path, lineno)
        rows.append((p, parts[1], parts[2]))
    if header is None:
        raise DataFormatError("empty file", path)
    if not rows:
        raise DataFormatError("no data rows", path)
    label, weight, convention, prime_bound = header
    listed = {p for p, _, _ in rows}
    expected = prime_sieve(prime_bound)
    for q in expected:
        if int(q) not in listed:
            raise MissingPrimeError(int(q))
    extra = listed.difference(int(q) for q in expected)
    if extra:
        raise DataFormatError(f"row for non-prime or out-of-range index {min(extra)}", path)
    return EigenvalueFile(label, weight, convention, prime_bound, tuple(rows))


def _parse_header(body: str, path, lineno):
    fields = {}
    for item in body.split():
        if "=" not in item:
            raise DataFormatError(f"bad header item {item!r}", path, lineno)
        key, value = item.split("=", 1)
        fields[key] = value
    missing = {"label", "k", "convention", "prime_bound"} - fields.keys()
    if missing:
        raise DataFormatError(f"header lacks {sorted(missing)}", path, lineno)
    if fields["convention"] not in CONVENTIONS:
        raise DataFormatError(f"unknown convention {fields['convention']!r}", path, lineno)
    try:
        return fields["label"], int(fields["k"]), fields["convention"], int(fields["prime_bound"])
    except ValueError:
        raise DataFormatError("k and prime_bound must be integers", path, lineno) from None


def read_eigenvalue_file(path) -> EigenvalueFile:
    path = Path(path)
    return parse_eigenvalue_text(path.read_text(), path)


def to_eigenform(ef: EigenvalueFile, classical: bool = False) -> EigenformData:
    factors = []
    shift = ef.weight - 1.5
    for p, s1, s2 in ef.rows:
        v1, v2 = parse_number(s1), parse_number(s2)
        if ef.convention == "e1e2":
            factors.append(LocalFactor(p, v1, v2))
            continue
        if classical:
            v1 = v1 * p ** (-shift)
            v2 = v2 * p ** (-2 * shift)
        factors.append(hecke_to_local(p, v1, v2))
    return EigenformData.from_locals(ef.weight, ef.label, factors, ef.prime_bound)


def load(path, classical: bool = False) -> EigenformData:
    return to_eigenform(read_eigenvalue_file(path), classical=classical)


def to_eigenvalue_file(F: EigenformData, convention: str = "e1e2") -> EigenvalueFile:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    rows = []
    for p, f in F.locals.items():
        if convention == "e1e2":
            v1, v2 = f.e1, f.e2
        else:
            _, v1, v2 = local_lambda(f, 2)
        rows.append((p, format_number(v1), format_number(v2)))
    return EigenvalueFile(F.label, F.weight, convention, F.prime_bound, tuple(rows))


def dumps_eigenform(F: EigenformData, convention: str = "e1e2") -> str:
    return to_eigenvalue_file(F, convention).to_text()


def save(F: EigenformData, path, convention: str = "e1e2") -> None:
    Path(path).write_text(dumps_eigenform(F, convention))


# --- synthetic families -------------------------------------------------


def gen_trivial(prime_bound: int, weight: int = DEFAULT_SYNTHETIC_WEIGHT) -> EigenformData:
    """Every local factor ``(1 - t)^{-4}``, so that ``a_F(n) = d_4(n)``."""
    _check_bound(prime_bound)
    factors = [LocalFactor(int(p), 4, 6) for p in prime_sieve(prime_bound)]
    return EigenformData.from_locals(weight, "trivial", factors, prime_bound)


def tempered_local(p: int, a: float, b: float) -> LocalFactor:
    """Local factor with spin parameters ``e^{+-ia}, e^{+-ib}``."""
    ca, cb = math.cos(a), math.cos(b)
    return LocalFactor(p, 2 * ca + 2 * cb, 2 + 4 * ca * cb)


def gen_tempered(
    seed: int,
    prime_bound: int,
    weight: int = DEFAULT_SYNTHETIC_WEIGHT,
    overrides: dict[int, tuple[float, float]] | None = None,
) -> EigenformData:
    """Random tempered form: independent uniform angles ``a, b`` in ``[0, pi]`` per prime."""
    _check_bound(prime_bound)
    primes = prime_sieve(prime_bound)
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, math.pi, size=(len(primes), 2))
    overrides = overrides or {}
    factors = []
    for p, (a, b) in zip(primes.tolist(), angles):
        a, b = overrides.get(p, (a, b))
        factors.append(tempered_local(p, float(a), float(b)))
    return EigenformData.from_locals(weight, f"tempered-{seed}", factors, prime_bound)


def sk_local(p: int, theta: float) -> LocalFactor:
    """Saito-Kurokawa type factor with spin parameters ``sqrt(p), 1/sqrt(p), e^{+-i theta}``."""
    s = math.sqrt(p) + 1 / math.sqrt(p)
    c = 2 * math.cos(theta)
    return LocalFactor(p, s + c, 2 + s * c)


def gen_sk(
    prime_bound: int,
    seed: int | None = None,
    angles=None,
    weight: int = DEFAULT_SYNTHETIC_WEIGHT,
) -> EigenformData:
    """Lift-shaped data ``zeta(s - 1/2) zeta(s + 1/2) L(f, s)``.

    ``angles`` gives ``theta_p`` per prime in increasing order; otherwise
    they are drawn uniformly in ``[0, pi]`` from ``seed``.
    """
    _check_bound(prime_bound)
    primes = prime_sieve(prime_bound).tolist()
    if angles is None:
        if seed is None:
            raise ValueError("gen_sk needs a seed or explicit angles")
        angles = np.random.default_rng(seed).uniform(0.0, math.pi, size=len(primes))
        label = f"sk-{seed}"
    else:
        angles = list(angles)
        if len(angles) < len(primes):
            raise ValueError(f"need {len(primes)} angles, got {len(angles)}")
        label = "sk-angles"
    if weight % 2:
        raise ValueError("Saito-Kurokawa lifts exist only in even weight")
    factors = [sk_local(p, float(th)) for p, th in zip(primes, angles)]
    return EigenformData.from_locals(weight, label, factors, prime_bound)


@dataclass(frozen=True)
class SyntheticSpec:
    family: str
    seed: int = 0
    prime_bound: int = 100
    weight: int = DEFAULT_SYNTHETIC_WEIGHT
    sk_source: tuple[float, ...] | None = None

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        """``family[:seed]``, e.g. ``tempered:3``, ``sk:1``, ``trivial``."""
        family, _, rest = text.partition(":")
        if family not in ("tempered", "sk", "trivial"):
            raise ValueError(f"unknown synthetic family {family!r}")
        seed = int(rest) if rest else 0
        return cls(family, seed)

    def build(self, prime_bound: int | None = None) -> EigenformData:
        bound = self.prime_bound if prime_bound is None else prime_bound
        if self.family == "tempered":
            return gen_tempered(self.seed, bound, self.weight)
        if self.family == "sk":
            if self.sk_source is not None:
                return gen_sk(bound, angles=self.sk_source, weight=self.weight)
            return gen_sk(bound, seed=self.seed, weight=self.weight)
        return gen_trivial(bound, self.weight)


def _check_bound(prime_bound: int) -> None:
    if prime_bound < 2:
        raise ValueError(f"prime_bound must be >= 2, got {prime_bound}")


# --- reports ------------------------------------------------------------

# Column order for each report type; anything else falls back to field order.
SCHEMAS = {
    "VoronoiEvaluation": ("x", "M", "T", "exact", "main_term", "residual"),
    "WindowScan": ("x", "c", "plus", "minus", "zero", "lower_target"),
    "KernelTest": ("t", "kappa", "tau", "J", "expected", "deviation"),
    "ExtremaReport": ("X", "C", "x1", "x2", "S1", "S2", "c1_emp", "c2_emp", "lemma_holds"),
    "SignCounts": ("x", "plus", "minus", "zero", "zero_tolerance", "relative_tolerance"),
    "PerronComparison": ("x", "T", "P", "kappa", "perron", "direct", "deviation", "n_nodes", "est_error"),
}


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def columns_for(report) -> tuple[str, ...]:
    name = type(report).__name__
    if name in SCHEMAS:
        return SCHEMAS[name]
    return tuple(f.name for f in dataclasses.fields(report))


def csv_text(reports) -> str:
    reports = list(reports)
    if not reports:
        return ""
    cols = columns_for(reports[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in reports:
        w.writerow([_cell(getattr(r, c)) for c in cols])
    return buf.getvalue()


def emit_csv(reports, path) -> None:
    Path(path).write_text(csv_text(reports))


def _jsonable(v):
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return {c: _jsonable(getattr(v, c)) for c in columns_for(v)}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def json_text(report) -> str:
    return json.dumps(_jsonable(report), indent=2) + "\n"


def emit_json(report, path) -> None:
    Path(path).write_text(json_text(report))
