"""Fetch contract source/bytecode from an explorer-style JSON API.

The API shape mirrors the common block-explorer endpoints:

    GET {base}?module=contract&action=getsourcecode&address=0x...&apikey=K
    GET {base}?module=proxy&action=eth_getCode&address=0x...&tag=latest&apikey=K

Results are cached under one directory per address; a cached address is
never re-fetched. The API key comes from the environment only
(SOLDEFECT_API_KEY); nothing secret is written to disk.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

import requests

from .config import FetchConfig

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")

DEFAULT_CACHE_DIR = os.path.join(".soldefect", "cache")


class AddressFormatError(ValueError):
    """Malformed address argument (usage error, exit code 2)."""


class FetchError(RuntimeError):
    """Network/API failure (exit code 3)."""

    def __init__(self, message: str, retry_after: str | None = None):
        super().__init__(message)
        self.retry_after = retry_after


@dataclass
class FetchResult:
    address: str
    source_path: str | None = None
    bytecode_path: str | None = None
    from_cache: bool = False
    notices: list[str] = field(default_factory=list)

    @property
    def paths(self) -> list[str]:
        return [p for p in (self.source_path, self.bytecode_path) if p]


def normalize_address(address: str) -> str:
    if not _ADDRESS_RE.match(address):
        raise AddressFormatError(
            f"address must be 0x followed by 40 hex digits, got {address!r}")
    return address.lower()


def fetch_contract(address: str, config: FetchConfig,
                   session: requests.Session | None = None) -> FetchResult:
    """Download (or reuse cached) source and runtime bytecode for an address."""
    address = normalize_address(address)
    if not config.api_base_url:
        raise FetchError("no fetch.api_base_url configured")
    cache_dir = os.path.join(config.cache_dir or DEFAULT_CACHE_DIR, address)
    meta_path = os.path.join(cache_dir, "meta.json")
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        result = FetchResult(address, meta.get("source_path"),
                             meta.get("bytecode_path"), from_cache=True,
                             notices=meta.get("notices", []))
        return result

    session = session or requests.Session()
    result = FetchResult(address)

    source_payload = _api_get(session, config, {
        "module": "contract", "action": "getsourcecode", "address": address,
    })
    source_text = _extract_source(source_payload)

    code_payload = _api_get(session, config, {
        "module": "proxy", "action": "eth_getCode", "address": address,
        "tag": "latest",
    })
    code_hex = code_payload.get("result") if isinstance(code_payload, dict) else None

    os.makedirs(cache_dir, exist_ok=True)
    if source_text:
        result.source_path = os.path.join(cache_dir, "source.sol")
        with open(result.source_path, "w", encoding="utf-8") as fh:
            fh.write(source_text)
    else:
        result.notices.append(
            f"{address}: contract source is not verified; bytecode only")
    if isinstance(code_hex, str) and code_hex not in ("", "0x"):
        result.bytecode_path = os.path.join(cache_dir, "runtime.hex")
        with open(result.bytecode_path, "w", encoding="ascii") as fh:
            fh.write(code_hex + "\n")

    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump({"source_path": result.source_path,
                   "bytecode_path": result.bytecode_path,
                   "notices": result.notices}, fh, indent=2)
    return result


def _api_get(session: requests.Session, config: FetchConfig,
             params: dict) -> dict:
    if config.api_key:
        params = dict(params, apikey=config.api_key)
    try:
        response = session.get(config.api_base_url, params=params, timeout=30)
    except requests.RequestException as exc:
        raise FetchError(f"fetch failed: {exc}") from exc
    if response.status_code == 429:
        retry = response.headers.get("Retry-After", "a while")
        raise FetchError(f"rate limited by the API; retry after {retry}",
                         retry_after=retry)
    if response.status_code != 200:
        raise FetchError(f"API returned HTTP {response.status_code}")
    try:
        return response.json()
    except ValueError as exc:
        raise FetchError(f"API returned invalid JSON: {exc}") from exc


def _extract_source(payload: dict) -> str | None:
    result = payload.get("result")
    if isinstance(result, list) and result:
        source = result[0].get("SourceCode", "")
        return source or None
    if isinstance(result, str):
        return result or None
    return None
