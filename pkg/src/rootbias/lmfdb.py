"""Cross-validation against the L-functions and modular forms database.

The client queries the LMFDB newform API when online and keeps one
versioned JSON document per (level, weight) in a local cache, so
validation runs are reproducible and work offline. Every cached
document carries a "source" marker; data produced by anything other
than the live API is never silently promoted to it.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import requests

from rootbias.bias import delta, minimal_balance

__all__ = [
    "LmfdbCacheMissError",
    "LmfdbClient",
    "LmfdbError",
    "LmfdbNetworkError",
    "LmfdbParseError",
    "MinimalBalanceReport",
    "NewformOrbitRecord",
    "ValidationReport",
]

CACHE_SCHEMA = 1
DEFAULT_BASE_URL = "https://www.lmfdb.org/api/mf_newforms/"
CACHE_DIR_ENV = "ROOTBIAS_CACHE_DIR"

# Fields requested from the API; cached documents use the same names.
_API_FIELDS = (
    "label",
    "dim",
    "fricke_eigenval",
    "atkin_lehner_eigenvals",
    "is_cm",
    "is_twist_minimal",
)


class LmfdbError(Exception):
    """Base class for everything this module raises on purpose."""


class LmfdbNetworkError(LmfdbError):
    """Transport-level failure; retrying later may succeed."""


class LmfdbParseError(LmfdbError):
    """The response or cached document had an unexpected shape."""

    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


class LmfdbCacheMissError(LmfdbError):
    """Offline mode and the cache has no document for this space."""


@dataclass(frozen=True)
class NewformOrbitRecord:
    """One Galois orbit of newforms with its root number sign.

    root_number_sign is the sign of the functional equation,
    (-1)^(k/2) times the Fricke eigenvalue; sign_source records where
    the eigenvalue came from.
    """

    level: int
    weight: int
    orbit_label: str
    orbit_dim: int
    root_number_sign: int
    is_twist_minimal: bool | None
    is_cm: bool | None
    sign_source: str

    def __post_init__(self):
        if self.orbit_dim < 1:
            raise ValueError(f"orbit dimension must be >= 1, got {self.orbit_dim}")
        if self.root_number_sign not in (1, -1):
            raise ValueError(f"root number sign must be +-1, got {self.root_number_sign}")


@dataclass(frozen=True)
class ValidationReport:
    level: int
    weight: int
    computed_delta: int
    external_sum: int
    orbit_count: int
    match: bool
    fetched_at: str


@dataclass(frozen=True)
class MinimalBalanceReport:
    """Outcome of checking the forced-balance prediction for minimal forms.

    When the twisting criterion holds, the minimal root numbers must sum
    to zero. Orbits lacking the twist-minimality flag make the external
    sum unknowable, reported as insufficient data rather than guessed.
    """

    level: int
    weight: int
    forced_zero: bool
    external_minimal_sum: int | None
    minimal_orbit_count: int | None
    insufficient_data: bool
    consistent: bool | None


class LmfdbClient:
    def __init__(
        self,
        cache_dir=None,
        offline: bool = False,
        base_url: str = DEFAULT_BASE_URL,
        timeout: float = 30.0,
        max_retries: int = 3,
        rate_limit_s: float = 0.5,
        session=None,
    ):
        if cache_dir is None:
            cache_dir = os.environ.get(CACHE_DIR_ENV) or (
                Path.home() / ".cache" / "rootbias" / "lmfdb"
            )
        self.cache_dir = Path(cache_dir)
        self.offline = offline
        self.base_url = base_url
        self.timeout = timeout
        self.max_retries = max_retries
        self.rate_limit_s = rate_limit_s
        self._session = session
        self._last_request = 0.0

    # -- cache layer ---------------------------------------------------

    def cache_path(self, level: int, weight: int) -> Path:
        return self.cache_dir / f"{level}_{weight}.json"

    def _read_cache(self, level: int, weight: int):
        path = self.cache_path(level, weight)
        if not path.exists():
            return None
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise LmfdbParseError(f"corrupt cache file {path}: {exc}") from exc
        if doc.get("schema") != CACHE_SCHEMA:
            raise LmfdbParseError(
                f"unsupported cache schema in {path}: {doc.get('schema')!r}",
                payload=doc,
            )
        if doc.get("level") != level or doc.get("weight") != weight:
            raise LmfdbParseError(f"cache file {path} is for a different space", payload=doc)
        return doc

    def _write_cache(self, doc) -> None:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self.cache_path(doc["level"], doc["weight"])
        # Atomic replace so a crashed run never leaves a torn document.
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- network layer -------------------------------------------------

    def _http_get(self, params):
        if self._session is None:
            self._session = requests.Session()
        wait = self.rate_limit_s - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        last_exc = None
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(self.rate_limit_s * 2**attempt)
            self._last_request = time.monotonic()
            try:
                resp = self._session.get(self.base_url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500:
                last_exc = LmfdbNetworkError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise LmfdbNetworkError(f"unexpected status {resp.status_code}")
            return resp
        raise LmfdbNetworkError(f"request failed after {self.max_retries} tries: {last_exc}")

    def _fetch_api(self, level: int, weight: int):
        params = {
            "level": f"i{level}",
            "weight": f"i{weight}",
            "char_order": "i1",
            "_fields": ",".join(_API_FIELDS),
            "_format": "json",
        }
        resp = self._http_get(params)
        try:
            body = resp.json()
        except ValueError as exc:
            raise LmfdbParseError("response is not JSON", payload=resp.text) from exc
        if "data" not in body:
            raise LmfdbParseError("response has no data field", payload=body)
        orbits = []
        for rec in body["data"]:
            if "label" not in rec or "dim" not in rec:
                raise LmfdbParseError("orbit record missing label or dim", payload=rec)
            orbits.append({f: rec.get(f) for f in _API_FIELDS})
        return {
            "schema": CACHE_SCHEMA,
            "level": level,
            "weight": weight,
            "source": "lmfdb-api",
            "fetched_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "orbits": orbits,
        }

    # -- public API ----------------------------------------------------

    def load_document(self, level: int, weight: int):
        doc = self._read_cache(level, weight)
        if doc is not None:
            return doc
        if self.offline:
            raise LmfdbCacheMissError(
                f"no cached document for level {level}, weight {weight} "
                f"in {self.cache_dir} and the client is offline"
            )
        doc = self._fetch_api(level, weight)
        self._write_cache(doc)
        return doc

    def fetch_newform_orbits(self, level: int, weight: int) -> list[NewformOrbitRecord]:
        doc = self.load_document(level, weight)
        source = doc.get("source", "unknown")
        return [self._to_record(level, weight, orbit, source) for orbit in doc["orbits"]]

    @staticmethod
    def _to_record(level, weight, orbit, source) -> NewformOrbitRecord:
        fricke = orbit.get("fricke_eigenval")
        if fricke in (1, -1):
            sign_field = "fricke_eigenval"
        else:
            al = orbit.get("atkin_lehner_eigenvals")
            if not al:
                raise LmfdbParseError(
                    f"orbit {orbit.get('label')} has no usable eigenvalue data",
                    payload=orbit,
                )
            fricke = 1
            for entry in al:
                fricke *= entry[1]
            if fricke not in (1, -1):
                raise LmfdbParseError(
                    f"orbit {orbit.get('label')} has malformed Atkin-Lehner data",
                    payload=orbit,
                )
            sign_field = "atkin_lehner_eigenvals"
        return NewformOrbitRecord(
            level=level,
            weight=weight,
            orbit_label=str(orbit["label"]),
            orbit_dim=int(orbit["dim"]),
            root_number_sign=(-1) ** (weight // 2) * fricke,
            is_twist_minimal=orbit.get("is_twist_minimal"),
            is_cm=orbit.get("is_cm"),
            sign_source=f"{sign_field} ({source})",
        )

    def validate_delta(self, level: int, weight: int) -> ValidationReport:
        """Compare delta(N, k) against the dimension-weighted sum of
        root number signs over all newform orbits."""
        doc = self.load_document(level, weight)
        orbits = self.fetch_newform_orbits(level, weight)
        external = sum(o.orbit_dim * o.root_number_sign for o in orbits)
        computed = delta(level, weight)
        return ValidationReport(
            level=level,
            weight=weight,
            computed_delta=computed,
            external_sum=external,
            orbit_count=len(orbits),
            match=computed == external,
            fetched_at=doc.get("fetched_at", ""),
        )

    def validate_minimal(self, level: int, weight: int) -> MinimalBalanceReport:
        orbits = self.fetch_newform_orbits(level, weight)
        forced = minimal_balance(level)
        missing = [o for o in orbits if o.is_twist_minimal is None]
        if missing:
            return MinimalBalanceReport(
                level=level,
                weight=weight,
                forced_zero=forced,
                external_minimal_sum=None,
                minimal_orbit_count=None,
                insufficient_data=True,
                consistent=None,
            )
        minimal = [o for o in orbits if o.is_twist_minimal]
        total = sum(o.orbit_dim * o.root_number_sign for o in minimal)
        return MinimalBalanceReport(
            level=level,
            weight=weight,
            forced_zero=forced,
            external_minimal_sum=total,
            minimal_orbit_count=len(minimal),
            insufficient_data=False,
            consistent=(total == 0) if forced else True,
        )
