"""Engine configuration: defaults, config file, flag overrides.

Precedence is flags > config file > built-in defaults; the LLM endpoint and
bearer token can additionally be overridden through environment variables.
"""

from __future__ import annotations

import enum
import json
import shlex
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import SectionSelector
from .extraction import Lexicon, lexicon_extract, load_default_lexicon
from .llm import Backend, LlmConfig
from .scoring import Weights
from .worker import ExternalExtractor, StdioTransport, TcpTransport


class ConfigError(ValueError):
    """Invalid configuration file or flag value."""


class ExtractorKind(enum.Enum):
    LEXICON = "lexicon"
    COMMAND = "cmd"
    TCP = "tcp"


@dataclass(frozen=True, slots=True)
class ExtractorSpec:
    kind: ExtractorKind
    path: str | None = None          # lexicon file; None means the bundled one
    command: tuple[str, ...] = ()    # worker launched over stdio
    host: str | None = None
    port: int | None = None


@dataclass(frozen=True, slots=True)
class EngineConfig:
    extractor: ExtractorSpec = ExtractorSpec(kind=ExtractorKind.LEXICON)
    llm: LlmConfig = LlmConfig()
    weights: Weights = Weights()
    section: SectionSelector = SectionSelector.BOTH
    concurrency: int = 1

    def __post_init__(self) -> None:
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        spec = self.extractor
        if spec.kind is ExtractorKind.LEXICON and spec.path is not None:
            if not Path(spec.path).is_file():
                raise ConfigError(f"lexicon file not found: {spec.path}")


def parse_weights_spec(spec: str, base: Weights | None = None) -> Weights:
    """Parse 'missing=2,mismatch=1.5,surplus=1'; omitted keys keep base values."""
    weights = base or Weights()
    mapping = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        key, _, value = item.partition("=")
        if not value:
            raise ConfigError(f"weight item {item!r} is not key=value")
        try:
            mapping[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"weight value {value!r} is not a number") from None
    updates = {}
    for key, value in mapping.items():
        if key not in ("missing", "mismatch", "surplus"):
            raise ConfigError(f"unknown weight category {key!r}")
        updates[f"w_{key}"] = value
    try:
        return replace(weights, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_extractor_spec(spec: str) -> ExtractorSpec:
    """Parse 'lexicon[:path]', 'tcp:host:port' or 'cmd:<command line>'."""
    kind, _, rest = spec.partition(":")
    if kind == "lexicon":
        return ExtractorSpec(kind=ExtractorKind.LEXICON, path=rest or None)
    if kind == "tcp":
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"tcp extractor needs host:port, got {rest!r}")
        return ExtractorSpec(kind=ExtractorKind.TCP, host=host, port=int(port))
    if kind == "cmd":
        if not rest:
            raise ConfigError("cmd extractor needs a command line")
        return ExtractorSpec(kind=ExtractorKind.COMMAND, command=tuple(shlex.split(rest)))
    raise ConfigError(f"unknown extractor kind {kind!r}")


def parse_llm_spec(spec: str, base: LlmConfig) -> LlmConfig:
    """Parse 'mock' or an HTTP endpoint URL."""
    if spec == "mock":
        return replace(base, backend=Backend.MOCK, base_url=None)
    if spec.startswith(("http://", "https://")):
        return replace(base, backend=Backend.HTTP, base_url=spec)
    raise ConfigError(f"llm spec must be 'mock' or an http(s) URL, got {spec!r}")


def _llm_from_file(data: dict, base: LlmConfig) -> LlmConfig:
    known = {"backend", "base_url", "model_name", "temperature", "max_retries", "timeout"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown llm config keys: {sorted(unknown)}")
    kwargs: dict = {}
    if "backend" in data:
        try:
            kwargs["backend"] = Backend(data["backend"])
        except ValueError:
            raise ConfigError(f"unknown llm backend {data['backend']!r}") from None
    for key in ("base_url", "model_name"):
        if key in data:
            kwargs[key] = data[key]
    for key in ("temperature", "timeout"):
        if key in data:
            kwargs[key] = float(data[key])
    if "max_retries" in data:
        kwargs["max_retries"] = int(data["max_retries"])
    try:
        return replace(base, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | None) -> EngineConfig:
    """Built-in defaults, overridden by the JSON config file when given."""
    config = EngineConfig()
    if path is None:
        return config
    try:
        data = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")

    known = {"extractor", "llm", "weights", "section", "concurrency"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    extractor = config.extractor
    if "extractor" in data:
        value = data["extractor"]
        if isinstance(value, str):
            extractor = parse_extractor_spec(value)
        elif isinstance(value, dict):
            kind = value.get("type", "lexicon")
            if kind == "lexicon":
                extractor = ExtractorSpec(kind=ExtractorKind.LEXICON, path=value.get("path"))
            elif kind == "tcp":
                extractor = ExtractorSpec(
                    kind=ExtractorKind.TCP, host=value["host"], port=int(value["port"])
                )
            elif kind == "cmd":
                command = value["command"]
                if isinstance(command, str):
                    command = shlex.split(command)
                extractor = ExtractorSpec(
                    kind=ExtractorKind.COMMAND, command=tuple(command)
                )
            else:
                raise ConfigError(f"unknown extractor type {kind!r}")
        else:
            raise ConfigError("extractor config must be a string or object")

    llm = _llm_from_file(data.get("llm", {}), config.llm) if "llm" in data else config.llm

    weights = config.weights
    if "weights" in data:
        value = data["weights"]
        if isinstance(value, str):
            weights = parse_weights_spec(value)
        elif isinstance(value, dict):
            spec = ",".join(f"{k}={v}" for k, v in value.items())
            weights = parse_weights_spec(spec)
        else:
            raise ConfigError("weights config must be a string or object")

    section = config.section
    if "section" in data:
        try:
            section = SectionSelector.from_string(str(data["section"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    concurrency = int(data.get("concurrency", config.concurrency))
    return EngineConfig(
        extractor=extractor,
        llm=llm,
        weights=weights,
        section=section,
        concurrency=concurrency,
    )


class ExtractorRuntime:
    """A live extractor callable plus whatever connection backs it."""

    def __init__(self, spec: ExtractorSpec):
        self._handle: ExternalExtractor | None = None
        if spec.kind is ExtractorKind.LEXICON:
            lexicon = (
                load_default_lexicon()
                if spec.path is None
                else Lexicon.from_text(Path(spec.path).read_text("utf-8"))
            )
            self.extract = lambda text: lexicon_extract(lexicon, text)
        elif spec.kind is ExtractorKind.COMMAND:
            self._handle = ExternalExtractor(StdioTransport(spec.command))
            self.extract = self._handle.extract
        else:
            assert spec.host is not None and spec.port is not None
            self._handle = ExternalExtractor(TcpTransport(spec.host, spec.port))
            self.extract = self._handle.extract

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()

    def __enter__(self) -> "ExtractorRuntime":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
