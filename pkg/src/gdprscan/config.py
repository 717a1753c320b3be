"""Run configuration for the command-line pipeline.

One INI-style file drives every subcommand: artifact directories,
embedding and classifier hyperparameters, active-learning knobs, the
measurement threshold, and service settings. Every key has a default,
so an empty or absent file is a valid full configuration, and flags
parsed by the CLI override file values. Unknown sections or keys are
rejected rather than ignored so a typo cannot silently fall back to a
default.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, replace
from pathlib import Path

from .active import ActiveLearningConfig
from .classifier import ClassifierConfig
from .embeddings import EmbeddingConfig
from .errors import ConfigError


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs, resolved to concrete values."""

    corpus_dir: Path = Path("data/corpus")
    models_dir: Path = Path("models")
    reports_dir: Path = Path("reports")
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    al: ActiveLearningConfig = field(default_factory=ActiveLearningConfig)
    tau: float = 0.5
    min_tokens: int = 5
    max_tokens: int = 128
    host: str = "127.0.0.1"
    port: int = 8414
    token_file: Path | None = None
    static_dir: Path | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("tau must lie in [0, 1], got %r" % (self.tau,))
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ConfigError(
                "need 1 <= min_tokens <= max_tokens, got %r and %r"
                % (self.min_tokens, self.max_tokens))
        if not 1 <= self.port <= 65535:
            raise ConfigError("port must be a TCP port number, got %r" % (self.port,))


_PATH_KEYS = {
    "corpus_dir": "corpus_dir",
    "models_dir": "models_dir",
    "reports_dir": "reports_dir",
}

_TOP_LEVEL = {
    "segment": ("min_tokens", "max_tokens"),
    "measure": ("tau",),
}

_SERVICE_KEYS = ("host", "port", "token_file", "static_dir")


def _coerce(section: str, key: str, raw: str, target_type):
    try:
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(
            "[%s] %s: expected %s, got %r"
            % (section, key, target_type.__name__, raw))


def _apply_dataclass(current, section: str, items) -> object:
    """Overlay file values onto a nested config dataclass."""
    types = {f.name: f.type for f in dataclasses.fields(current)}
    updates = {}
    for key, raw in items:
        if key not in types:
            raise ConfigError("unknown key %r in section [%s]" % (key, section))
        target = float if types[key] in (float, "float") else int
        updates[key] = _coerce(section, key, raw, target)
    try:
        return replace(current, **updates)
    except ValueError as exc:
        raise ConfigError("invalid [%s] values: %s" % (section, exc))


def load_config(path=None) -> RunConfig:
    """Parse a configuration file, or return pure defaults for None.

    Raises ConfigError for unreadable files, syntax errors, unknown
    sections or keys, and values the nested configs reject.
    """
    config = RunConfig()
    if path is None:
        return config
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("cannot read config file %s: %s" % (path, exc))
    except configparser.Error as exc:
        raise ConfigError("cannot parse config file %s: %s" % (path, exc))

    for section in parser.sections():
        items = parser.items(section)
        if section == "paths":
            for key, raw in items:
                if key not in _PATH_KEYS:
                    raise ConfigError("unknown key %r in section [paths]" % (key,))
                config = replace(config, **{_PATH_KEYS[key]: Path(raw)})
        elif section == "embedding":
            config = replace(config, embedding=_apply_dataclass(
                config.embedding, section, items))
        elif section == "classifier":
            config = replace(config, classifier=_apply_dataclass(
                config.classifier, section, items))
        elif section == "active_learning":
            config = replace(config, al=_apply_dataclass(
                config.al, section, items))
        elif section in _TOP_LEVEL:
            allowed = _TOP_LEVEL[section]
            for key, raw in items:
                if key not in allowed:
                    raise ConfigError(
                        "unknown key %r in section [%s]" % (key, section))
                target = float if key == "tau" else int
                config = replace(config, **{key: _coerce(section, key, raw, target)})
        elif section == "service":
            for key, raw in items:
                if key not in _SERVICE_KEYS:
                    raise ConfigError("unknown key %r in section [service]" % (key,))
                if key == "port":
                    config = replace(config, port=_coerce(section, key, raw, int))
                elif key in ("token_file", "static_dir"):
                    config = replace(config, **{key: Path(raw)})
                else:
                    config = replace(config, host=raw)
        else:
            raise ConfigError("unknown section [%s]" % (section,))
    return config


def apply_overrides(config: RunConfig, seed: int | None = None,
                    threads: int | None = None) -> RunConfig:
    """Fold global CLI flags into the nested configs. Flags win.

    ``--seed`` reseeds the embedding, classifier, and query loop
    together (with distinct offsets so the streams stay independent).
    ``--threads`` is accepted for interface stability; computation is
    single-process, so it only needs to be a positive number.
    """
    if threads is not None and threads < 1:
        raise ConfigError("threads must be positive, got %r" % (threads,))
    if seed is None:
        return config
    return replace(
        config,
        embedding=replace(config.embedding, seed=seed + 1),
        classifier=replace(config.classifier, seed=seed + 2),
        al=replace(config.al, seed=seed + 3),
    )
