"""Run configuration: one TOML file, paths relative to the file."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .data import FACTOR_ORDER
from .factors import LEX_DIRECTIONS
from .morph import DEFAULT_PAIR_CAP

BUILTIN_LEX = "builtin:lex"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    base_dir: Path
    seed: int = 0
    out: Path = Path("out")
    # inputs
    pairs: Path | None = None
    x_conllu: Path | None = None
    y_conllu: Path | None = None
    embeddings: Path | None = None
    tagged_words: Path | None = None
    # factor options
    active: tuple[str, ...] = ("SEM", "SYN", "LEX", "MOR")
    lowercase: bool = True
    lex_direction: str = "hypothesis"
    brevity_penalty: bool = False
    retrofit_iterations: int = 10
    lexicon_cap: int = DEFAULT_PAIR_CAP
    mor_min_overlap: float = 0.05
    normalize: bool = True
    # regression
    metrics: dict[str, Path] = field(default_factory=dict)
    clb: dict[str, Path] = field(default_factory=dict)
    # adversarial
    adv_mode: str = "freitag"
    adv_input: Path | None = None
    adv_triples: Path | None = None
    adv_top_k: int = 100
    adv_metrics: dict[str, tuple[Path, Path] | str] = field(default_factory=dict)
    # ensemble
    ens_human: Path | None = None
    ens_members: dict[str, Path] = field(default_factory=dict)
    ens_combos: list[list[str]] = field(default_factory=list)
    ens_normalize_first: bool = True
    ens_by_language: bool = False

    # ---- validation per command -------------------------------------
    def _require(self, problems: list[str], label: str, path: Path | None):
        if path is None:
            problems.append(f"{label} is not configured")
        elif not path.is_file():
            problems.append(f"{label}: file not found: {path}")

    def _check(self, problems: list[str]):
        if problems:
            raise ConfigError("; ".join(problems))

    def validate_factors(self):
        p: list[str] = []
        bad = [f for f in self.active if f not in FACTOR_ORDER or f == "CLB"]
        if bad:
            p.append(f"unknown or non-pairwise factors in factors.active: {bad}")
        if not self.active:
            p.append("factors.active is empty")
        if self.lex_direction not in LEX_DIRECTIONS:
            p.append(f"factors.lex_direction must be one of {LEX_DIRECTIONS}")
        if self.retrofit_iterations < 1:
            p.append("factors.retrofit_iterations must be positive")
        self._require(p, "data.pairs", self.pairs)
        if "SYN" in self.active:
            self._require(p, "data.x_conllu (needed by SYN)", self.x_conllu)
            self._require(p, "data.y_conllu (needed by SYN)", self.y_conllu)
        if "MOR" in self.active:
            self._require(p, "data.embeddings (needed by MOR)", self.embeddings)
            if self.tagged_words is not None:
                self._require(p, "data.tagged_words", self.tagged_words)
            # FEATS of both parses drive the overlap check and, by default, the lexicon
            self._require(p, "data.x_conllu (needed by MOR)", self.x_conllu)
            self._require(p, "data.y_conllu (needed by MOR)", self.y_conllu)
        self._check(p)

    def validate_regress(self):
        p: list[str] = []
        if not self.metrics:
            p.append("no [metrics] score tables configured")
        for name, path in self.metrics.items():
            self._require(p, f"metrics.{name}", path)
        for name, path in self.clb.items():
            if name not in self.metrics:
                p.append(f"clb.{name} has no matching entry in [metrics]")
            self._require(p, f"clb.{name}", path)
        self._check(p)

    def validate_adversarial(self):
        p: list[str] = []
        if self.adv_triples is None and self.adv_input is None:
            p.append("adversarial needs either 'triples' or 'input'")
        if self.adv_triples is not None:
            self._require(p, "adversarial.triples", self.adv_triples)
        elif self.adv_input is not None:
            if self.adv_mode not in ("freitag", "paws"):
                p.append("adversarial.mode must be 'freitag' or 'paws'")
            self._require(p, "adversarial.input", self.adv_input)
        if not self.adv_metrics:
            p.append("no [adversarial.metrics] configured")
        for name, spec in self.adv_metrics.items():
            if spec == BUILTIN_LEX:
                continue
            self._require(p, f"adversarial.metrics.{name}.ab", spec[0])
            self._require(p, f"adversarial.metrics.{name}.ac", spec[1])
        self._check(p)

    def validate_ensemble(self):
        p: list[str] = []
        self._require(p, "ensemble.human", self.ens_human)
        for name, path in self.ens_members.items():
            self._require(p, f"ensemble.members.{name}", path)
        if not self.ens_combos:
            p.append("ensemble.combos is empty")
        for combo in self.ens_combos:
            if len(combo) < 2:
                p.append(f"combo {combo} needs at least two members")
            unknown = [m for m in combo if m not in self.ens_members]
            if unknown:
                p.append(f"combo {combo} references unknown members {unknown}")
        if self.ens_by_language:
            self._require(p, "data.pairs (needed by ensemble.by_language)", self.pairs)
        self._check(p)


def _path(base: Path, value) -> Path | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ConfigError(f"expected a path string, got {value!r}")
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    base = path.parent
    known = {"seed", "out", "data", "factors", "metrics", "clb", "adversarial", "ensemble"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    data = raw.get("data", {})
    fac = raw.get("factors", {})
    adv = raw.get("adversarial", {})
    ens = raw.get("ensemble", {})
    try:
        cfg = RunConfig(
            base_dir=base,
            seed=int(raw.get("seed", 0)),
            out=_path(base, raw.get("out", "out")),
            pairs=_path(base, data.get("pairs")),
            x_conllu=_path(base, data.get("x_conllu")),
            y_conllu=_path(base, data.get("y_conllu")),
            embeddings=_path(base, data.get("embeddings")),
            tagged_words=_path(base, data.get("tagged_words")),
            active=tuple(fac.get("active", RunConfig.active)),
            lowercase=bool(fac.get("lowercase", True)),
            lex_direction=fac.get("lex_direction", "hypothesis"),
            brevity_penalty=bool(fac.get("brevity_penalty", False)),
            retrofit_iterations=int(fac.get("retrofit_iterations", 10)),
            lexicon_cap=int(fac.get("lexicon_cap", DEFAULT_PAIR_CAP)),
            mor_min_overlap=float(fac.get("mor_min_overlap", 0.05)),
            normalize=bool(fac.get("normalize", True)),
            metrics={k: _path(base, v) for k, v in raw.get("metrics", {}).items()},
            clb={k: _path(base, v) for k, v in raw.get("clb", {}).items()},
            adv_mode=adv.get("mode", "freitag"),
            adv_input=_path(base, adv.get("input")),
            adv_triples=_path(base, adv.get("triples")),
            adv_top_k=int(adv.get("top_k", 100)),
            adv_metrics={k: _adv_metric(base, k, v) for k, v in adv.get("metrics", {}).items()},
            ens_human=_path(base, ens.get("human")),
            ens_members={k: _path(base, v) for k, v in ens.get("members", {}).items()},
            ens_combos=[list(c) for c in ens.get("combos", [])],
            ens_normalize_first=bool(ens.get("normalize_first", True)),
            ens_by_language=bool(ens.get("by_language", False)),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"{path}: {e}") from None
    return cfg


def _adv_metric(base: Path, name: str, value):
    if value == BUILTIN_LEX:
        return BUILTIN_LEX
    if isinstance(value, dict) and set(value) == {"ab", "ac"}:
        return (_path(base, value["ab"]), _path(base, value["ac"]))
    raise ConfigError(f"adversarial.metrics.{name}: expected {BUILTIN_LEX!r} or {{ab = ..., ac = ...}}")
