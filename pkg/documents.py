"""
Filter and Cascade Documents
============================
JSON files written and read by the command line.

- Floats are written with Python's shortest round-trip repr, so a load
  reproduces every coefficient bit for bit.
- Loading re-validates the invariants of the decoded value; any failure is
  reported as a DocumentError.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import settings
from cascade import FirCascade
from polyrat import RationalFilter, RealPoly
from qmf_errors import DocumentError, ValidationError

logger = logging.getLogger(__name__)

FILTER_KIND = "0-sym"


@dataclass
class FilterDocument:
    m: int
    sign_at_i: int
    lambdas: list
    numerator: list
    denominator: list
    provenance: str = ""
    a_poly: list = None
    a_sign: int = None
    kind: str = FILTER_KIND
    version: int = settings.DOCUMENT_VERSION

    @classmethod
    def from_filter(cls, H):
        return cls(
            m=H.m,
            sign_at_i=H.sign_at_i,
            lambdas=[[v.real, v.imag] for v in H.lambdas],
            numerator=H.num.tolist(),
            denominator=H.den.tolist(),
            provenance=H.provenance,
            a_poly=H.a_poly.tolist() if H.is_factored else None,
            a_sign=H.a_sign,
        )

    def to_filter(self):
        try:
            H = RationalFilter(
                RealPoly.exact(self.numerator),
                RealPoly.exact(self.denominator),
                m=self.m,
                sign_at_i=self.sign_at_i,
                lambdas=tuple(complex(re, im) for re, im in self.lambdas),
                provenance=self.provenance,
                a_poly=None if self.a_poly is None else RealPoly.exact(self.a_poly),
                a_sign=self.a_sign,
            )
            return H.validate()
        except (ValidationError, TypeError, ValueError) as exc:
            raise DocumentError(f"filter document is inconsistent: {exc}", invariant="filter document") from exc


@dataclass
class CascadeDocument:
    epsilon: float
    achieved: float
    shift_N: int
    P: list
    factors: list = field(default_factory=list)
    delay: int = 0
    version: int = settings.DOCUMENT_VERSION

    @classmethod
    def from_cascade(cls, F):
        return cls(
            epsilon=F.epsilon,
            achieved=F.achieved,
            shift_N=F.shift_N,
            P=F.P.tolist(),
            factors=[{"level": level, "coeffs": poly.tolist()} for level, poly in F.factors],
            delay=F.delay,
        )

    def to_cascade(self):
        try:
            F = FirCascade(
                shift_N=int(self.shift_N),
                P=self.P,
                factors=tuple((item["level"], item["coeffs"]) for item in self.factors),
                epsilon=float(self.epsilon),
                achieved=float(self.achieved),
                delay=int(self.delay),
            )
            return F.validate()
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"cascade document is inconsistent: {exc}", invariant="cascade document") from exc


# ============================================================================
# FILE I/O
# ============================================================================

def _write(document, path):
    text = json.dumps(asdict(document), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)


def _read(path, document_type):
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}", invariant="readable document") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}", invariant="json document") from exc
    if not isinstance(payload, dict):
        raise DocumentError(f"{path} does not hold a JSON object", invariant="json document")
    version = payload.get("version")
    if isinstance(version, bool) or version != settings.DOCUMENT_VERSION:
        raise DocumentError(f"{path}: unsupported document version {version!r}",
                            invariant="document version")
    try:
        return document_type(**payload)
    except TypeError as exc:
        raise DocumentError(f"{path}: unexpected document fields ({exc})", invariant="document fields") from exc


def save_filter(H, path):
    _write(FilterDocument.from_filter(H), path)


def load_filter(path):
    document = _read(path, FilterDocument)
    if document.kind != FILTER_KIND:
        raise DocumentError(f"{path}: unsupported filter kind {document.kind!r}", invariant="filter kind")
    return document.to_filter()


def save_cascade(F, path):
    _write(CascadeDocument.from_cascade(F), path)


def load_cascade(path):
    return _read(path, CascadeDocument).to_cascade()
