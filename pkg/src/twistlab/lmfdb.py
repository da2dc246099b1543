"""Curve records by label: shipped fixtures, then a local cache, then the LMFDB API."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from filelock import FileLock

from .curve import WeierstrassCurve, change_coordinates, conductor_and_root_number
from .errors import CacheCorrupt, HypothesisViolated, NetworkError, NotFound, TwistlabError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
API_URL = "https://www.lmfdb.org/api/ec_curvedata/"
CREMONA_LABEL = re.compile(r"^(\d+)([a-z]+)(\d+)$")
LMFDB_LABEL = re.compile(r"^(\d+)\.([a-z]+)(\d+)$")


@dataclass(frozen=True)
class CurveRecord:
    label: str
    a_invariants: tuple[int, int, int, int, int]
    conductor: int
    rank: int | None = None
    torsion_structure: tuple[int, ...] = ()
    mu2: int | None = None
    lambda2: int | None = None
    root_number: int | None = None
    source: str = "fixture"
    display_a_invariants: tuple[int, ...] | None = None
    witness: dict[str, str] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a_invariants", tuple(int(a) for a in self.a_invariants))
        object.__setattr__(self, "torsion_structure", tuple(int(t) for t in self.torsion_structure))
        if self.display_a_invariants is not None:
            object.__setattr__(self, "display_a_invariants", tuple(int(a) for a in self.display_a_invariants))
        if len(self.a_invariants) != 5:
            raise ValueError("a_invariants must have 5 entries")
        for name in ("mu2", "lambda2"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.root_number not in (None, 1, -1):
            raise ValueError("root_number must be +1 or -1")

    def curve(self) -> WeierstrassCurve:
        return WeierstrassCurve.from_ainvs(self.a_invariants)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["a_invariants"] = list(self.a_invariants)
        d["torsion_structure"] = list(self.torsion_structure)
        if self.display_a_invariants is not None:
            d["display_a_invariants"] = list(self.display_a_invariants)
        d.pop("source")
        return d

    @classmethod
    def from_json_dict(cls, d: dict, source: str) -> "CurveRecord":
        keys = {"label", "a_invariants", "conductor", "rank", "torsion_structure", "mu2", "lambda2",
                "root_number", "display_a_invariants", "witness"}
        return cls(**{k: v for k, v in d.items() if k in keys}, source=source)


def normalize_label(label: str) -> str:
    label = label.strip()
    if not (CREMONA_LABEL.match(label) or LMFDB_LABEL.match(label)):
        raise HypothesisViolated(f"malformed curve label {label!r}", clause="Cremona or LMFDB label")
    return label


def check_record(rec: CurveRecord) -> list[str]:
    """Consistency problems of a record against local recomputation (empty if fine)."""
    problems = []
    try:
        E = rec.curve()
    except TwistlabError as exc:
        return [exc.message]
    try:
        N, w = conductor_and_root_number(E)
    except TwistlabError:
        # not semistable with good reduction at 2, so nothing to recompute
        return problems
    if N != rec.conductor:
        problems.append(f"conductor {rec.conductor} disagrees with recomputed {N}")
    if rec.root_number is not None and rec.root_number != w:
        problems.append(f"root number {rec.root_number:+d} disagrees with recomputed {w:+d}")
    if rec.display_a_invariants is not None and rec.witness is not None:
        u, r, s, t = (Fraction(rec.witness[k]) for k in "urst")
        got = change_coordinates(rec.a_invariants, u, r, s, t)
        if list(got) != list(rec.display_a_invariants):
            problems.append("display model does not match the minimal model under the stored witness")
    return problems


# --- fixtures -----------------------------------------------------------------

def fixture_dir() -> Path:
    return Path(str(resources.files("twistlab") / "fixtures"))


def load_fixture(label: str, directory: Path | None = None) -> CurveRecord | None:
    directory = Path(directory) if directory is not None else fixture_dir()
    path = directory / f"{label}.json"
    if not path.is_file():
        return None
    with open(path, encoding="utf-8") as fh:
        return CurveRecord.from_json_dict(json.load(fh), "fixture")


def fixture_labels(directory: Path | None = None) -> list[str]:
    directory = Path(directory) if directory is not None else fixture_dir()
    return sorted(p.stem for p in directory.glob("*.json"))


# --- cache --------------------------------------------------------------------

def cache_dir() -> Path:
    env = os.environ.get("TWISTLAB_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "twistlab"


def _checksum(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def cache_path(label: str, root: Path | None = None) -> Path:
    root = Path(root) if root is not None else cache_dir()
    h = hashlib.sha256(label.encode()).hexdigest()
    return root / h[:2] / f"{h}.json"


def cache_write(rec: CurveRecord, root: Path | None = None) -> Path:
    path = cache_path(rec.label, root)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = rec.to_json_dict()
    doc = {"schema_version": SCHEMA_VERSION, "record": payload, "checksum": _checksum(payload)}
    with FileLock(str(path) + ".lock"):
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, indent=2), encoding="utf-8")
        os.replace(tmp, path)
    return path


def cache_read(label: str, root: Path | None = None) -> CurveRecord | None:
    path = cache_path(label, root)
    if not path.is_file():
        return None
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        payload = doc["record"]
        ok = doc.get("schema_version") == SCHEMA_VERSION and doc.get("checksum") == _checksum(payload)
    except (ValueError, KeyError, TypeError) as exc:
        raise CacheCorrupt(f"unreadable cache entry for {label}: {exc}") from exc
    if not ok:
        raise CacheCorrupt(f"checksum or schema mismatch in cache entry for {label} at {path}")
    return CurveRecord.from_json_dict(payload, "cache")


# --- remote -------------------------------------------------------------------

def _query_params(label: str) -> dict[str, str]:
    key = "lmfdb_label" if LMFDB_LABEL.match(label) else "Clabel"
    return {key: label, "_format": "json"}


def parse_api_response(label: str, doc: dict) -> CurveRecord:
    rows = doc.get("data") or []
    if not rows:
        raise NotFound(f"no curve with label {label} in LMFDB")
    row = rows[0]
    rn = row.get("root_number")
    if rn is None and row.get("analytic_rank") is not None:
        rn = -1 if row["analytic_rank"] % 2 else 1
    # only explicit Iwasawa fields are trusted; anything else stays unset
    mu2 = row.get("mu2", row.get("iwasawa_mu2"))
    lam2 = row.get("lambda2", row.get("iwasawa_lambda2"))
    return CurveRecord(
        label=label,
        a_invariants=tuple(row["ainvs"]),
        conductor=int(row["conductor"]),
        rank=row.get("rank"),
        torsion_structure=tuple(row.get("torsion_structure") or ()),
        mu2=mu2,
        lambda2=lam2,
        root_number=rn,
        source="remote",
    )


def fetch_remote(label: str, *, timeout: float = 10.0, retries: int = 3, backoff: float = 1.0,
                 opener=urllib.request.urlopen) -> CurveRecord:
    url = API_URL + "?" + urllib.parse.urlencode(_query_params(label))
    last = None
    for attempt in range(retries):
        try:
            with opener(url, timeout=timeout) as resp:
                return parse_api_response(label, json.load(resp))
        except (urllib.error.URLError, TimeoutError, OSError, ValueError) as exc:
            last = exc
            log.info("LMFDB request for %s failed (attempt %d): %s", label, attempt + 1, exc)
            if attempt + 1 < retries:
                time.sleep(backoff * 2**attempt)
    raise NetworkError(f"LMFDB request for {label} failed after {retries} attempts: {last}")


def offline_forced() -> bool:
    return os.environ.get("TWISTLAB_OFFLINE", "") not in ("", "0")


def fetch_curve(label: str, offline: bool = False, *, fixtures: Path | None = None,
                cache: Path | None = None, **remote_kwargs) -> CurveRecord:
    """Resolve a label from fixtures, then the cache, then (if allowed) LMFDB."""
    label = normalize_label(label)
    rec = load_fixture(label, fixtures)
    if rec is not None:
        return rec
    rec = cache_read(label, cache)
    if rec is not None:
        return rec
    if offline or offline_forced():
        raise NotFound(f"{label} is not in the fixtures or the cache and offline mode is on")
    rec = fetch_remote(label, **remote_kwargs)
    cache_write(rec, cache)
    return replace(rec, source="remote")
