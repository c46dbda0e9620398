"""Service configuration: one TOML or JSON file, overridable by CLI flags
and environment variables. Precedence: environment > flags > file > defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .grounding import MatcherConfig

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib


def fixture_root() -> Path:
    """Location of the data files shipped with the package."""
    return Path(__file__).parent / "fixtures"


@dataclass
class ServiceConfig:
    kg_path: str = ""
    embeddings_table: str = ""
    embed_base_url: str = ""
    embed_model: str = ""
    mode: str = "replay"
    fixtures_dir: str = ""
    chat_base_url: str = ""
    chat_model: str = ""
    api_key_env: str = "KGCHAT_API_KEY"
    theta_n: float = 0.85
    theta_r: float = 0.94
    two_hop_limit: int = 10
    host: str = "127.0.0.1"
    port: int = 8000
    store_path: str = "sessions"
    recommendations_k: int = 3
    domain_blurb: str = "dietary supplements and neurodegenerative conditions"

    def __post_init__(self):
        root = fixture_root()
        if not self.kg_path:
            self.kg_path = str(root / "kg" / "supplements.jsonl")
        if not self.embeddings_table:
            self.embeddings_table = str(root / "embeddings" / "supplements.json")
        if not self.fixtures_dir:
            self.fixtures_dir = str(root / "transcripts")

    def validate(self) -> None:
        if not Path(self.kg_path).exists():
            raise ConfigError(f"kg_path does not exist: {self.kg_path}")
        if self.mode not in ("live", "replay", "record"):
            raise ConfigError(f"mode must be live|replay|record, got {self.mode!r}")
        if self.mode == "replay" and not Path(self.fixtures_dir).exists():
            raise ConfigError(f"fixtures_dir does not exist: {self.fixtures_dir}")
        if self.mode in ("live", "record") and not (self.chat_base_url and self.chat_model):
            raise ConfigError(f"mode {self.mode} requires chat_base_url and chat_model")
        self.matcher()  # range-checks the thresholds

    def matcher(self) -> MatcherConfig:
        return MatcherConfig(
            theta_n=self.theta_n, theta_r=self.theta_r, two_hop_limit=self.two_hop_limit
        )

    def api_key(self) -> str | None:
        return os.environ.get(self.api_key_env) or None


_ENV_PREFIX = "KGCHAT_"
_FLOAT_FIELDS = {"theta_n", "theta_r"}
_INT_FIELDS = {"two_hop_limit", "port", "recommendations_k"}


def _coerce(name: str, value):
    try:
        if name in _FLOAT_FIELDS:
            return float(value)
        if name in _INT_FIELDS:
            return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc
    return value


def load_config(
    path: str | Path | None = None, flag_overrides: dict | None = None
) -> ServiceConfig:
    """Assemble the effective configuration.

    `flag_overrides` entries with value None are ignored, so CLI flags can
    be passed straight through.
    """
    values: dict = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"config file not found: {file_path}")
        raw = file_path.read_bytes()
        try:
            if file_path.suffix == ".json":
                values = json.loads(raw.decode("utf-8"))
            else:
                values = tomllib.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot parse config file {file_path}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a table/object at the top level")
    known = {f.name for f in fields(ServiceConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {k: _coerce(k, v) for k, v in values.items()}
    for key, value in (flag_overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config override: {key}")
        merged[key] = _coerce(key, value)
    for field_def in fields(ServiceConfig):
        env_value = os.environ.get(_ENV_PREFIX + field_def.name.upper())
        if env_value is not None:
            merged[field_def.name] = _coerce(field_def.name, env_value)
    return ServiceConfig(**merged)
