"""
Run configuration: YAML sections, synthesis parameter ranges and dataset presets
"""

import copy
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import yaml

from .data_types import (
    BlurKind, ColorAdjustParams, FusionParams, TransformParams, TrimShape, TrimSpec,
)
from .errors import ConfigError

SEED_ENV_VAR = "SYNTHAL_SEED"

Number = Union[int, float]


def _odd(value: int) -> int:
    """Even kernel sizes drawn from a range are bumped to the next odd value"""
    return value if value % 2 == 1 else value + 1


@dataclass(frozen=True)
class Range:
    """Closed interval [lo, hi]; a parameter is drawn uniformly from it"""
    lo: Number
    hi: Number

    def __post_init__(self):
        if self.lo > self.hi:
            raise ConfigError(f"range lower bound {self.lo} exceeds upper bound {self.hi}")

    @classmethod
    def parse(cls, value: Any, key: str = "range") -> "Range":
        if isinstance(value, Range):
            return value
        if isinstance(value, bool) or value is None:
            raise ConfigError(f"{key}: expected a number or [lo, hi], got {value!r}")
        if isinstance(value, (int, float)):
            return cls(value, value)
        if isinstance(value, (list, tuple)) and len(value) == 2 and all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return cls(value[0], value[1])
        raise ConfigError(f"{key}: expected a number or [lo, hi], got {value!r}")

    def to_yaml(self) -> Any:
        return self.lo if self.lo == self.hi else [self.lo, self.hi]

    def uniform(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))

    def integer(self, rng: np.random.Generator) -> int:
        return int(rng.integers(int(self.lo), int(self.hi) + 1))


@dataclass(frozen=True)
class CircleTrimRange:
    center_x: Range = Range(115, 125)
    center_y: Range = Range(115, 125)
    radius: Range = Range(150, 170)


@dataclass(frozen=True)
class RectTrimRange:
    top: Range = Range(6, 9)
    bottom: Range = Range(6, 9)
    left: Range = Range(71, 74)
    right: Range = Range(71, 74)


def _section(name: str, **kwargs):
    metadata = {"section": name}
    return field(metadata=metadata, **kwargs)


@dataclass(frozen=True)
class SynthesisConfig:
    """
    Every synthesis parameter of one dataset preset. Fields are spread over the
    `synthesis`, `fusion` and `trim` sections of a run file.
    """
    # synthesis
    type1_per_query: float = _section("synthesis", default=2)
    type2_per_query: float = _section("synthesis", default=0)
    multi_blend: int = _section("synthesis", default=1)
    external_backgrounds: bool = _section("synthesis", default=True)
    background_inpainting: bool = _section("synthesis", default=False)
    resize_ratio: Range = _section("synthesis", default=Range(0.9, 1.2))
    move_w: Range = _section("synthesis", default=Range(-0.1, 0.1))
    move_h: Range = _section("synthesis", default=Range(-0.1, 0.1))
    rotation_deg: Range = _section("synthesis", default=Range(-30, 30))
    color_alpha: Range = _section("synthesis", default=Range(0.4, 1.0))
    brightness_beta: Range = _section("synthesis", default=Range(0.9, 1.3))
    max_attempts: int = _section("synthesis", default=10)
    min_retained: float = _section("synthesis", default=0.01)
    # fusion
    enabled: bool = _section("fusion", default=True)
    dilation_d: Range = _section("fusion", default=Range(15, 15))
    fusion_k: Range = _section("fusion", default=Range(10, 15))
    blur: str = _section("fusion", default="random")
    sigma_ratio: float = _section("fusion", default=3.0)
    # trim
    shape: str = _section("trim", default="circle")
    trim_circle: CircleTrimRange = _section("trim", default=CircleTrimRange())
    trim_rect: RectTrimRange = _section("trim", default=RectTrimRange())
    final_blur: Tuple[int, float] = _section("trim", default=(3, 3))

    def __post_init__(self):
        if self.type1_per_query < 0 or self.type2_per_query < 0:
            raise ConfigError("synthesis counts per query must be >= 0")
        if self.multi_blend not in (1, 2):
            raise ConfigError(f"multi_blend must be 1 or 2, got {self.multi_blend}")
        if self.blur not in ("random", BlurKind.AVERAGE.value, BlurKind.GAUSSIAN.value):
            raise ConfigError(f"fusion blur must be random, average or gaussian, got {self.blur}")
        if self.shape not in [s.value for s in TrimShape]:
            raise ConfigError(f"trim shape must be circle, rectangle or none, got {self.shape}")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        if not 0.0 <= self.min_retained <= 1.0:
            raise ConfigError("min_retained must lie in [0, 1]")
        if not self.sigma_ratio > 0:
            raise ConfigError("sigma_ratio must be > 0")
        if self.resize_ratio.lo <= 0:
            raise ConfigError("resize_ratio must be > 0")
        if self.color_alpha.lo < 0 or self.color_alpha.hi > 1:
            raise ConfigError("color_alpha must lie in [0, 1]")
        if self.brightness_beta.lo <= 0:
            raise ConfigError("brightness_beta must be > 0")
        if self.dilation_d.lo < 1 or self.fusion_k.lo < 1:
            raise ConfigError("dilation_d and fusion_k must be >= 1")

    # -- sampling -----------------------------------------------------------

    def sample_transform(self, rng: np.random.Generator) -> TransformParams:
        return TransformParams(
            c=self.resize_ratio.uniform(rng),
            w=self.move_w.uniform(rng),
            h=self.move_h.uniform(rng),
            theta=self.rotation_deg.uniform(rng),
        )

    def sample_kernel(self, rng: np.random.Generator) -> int:
        return _odd(self.fusion_k.integer(rng))

    def sample_fusion(self, rng: np.random.Generator,
                      kind: Optional[BlurKind] = None) -> FusionParams:
        d = _odd(self.dilation_d.integer(rng))
        k = self.sample_kernel(rng)
        drawn = rng.choice([BlurKind.AVERAGE.value, BlurKind.GAUSSIAN.value])
        if kind is None:
            kind = BlurKind(drawn) if self.blur == "random" else BlurKind(self.blur)
        return self.fusion_with(d, BlurKind(kind), k)

    def fusion_with(self, d: int, kind: BlurKind, k: int) -> FusionParams:
        sigma = k / self.sigma_ratio if kind is BlurKind.GAUSSIAN else None
        return FusionParams(d=d, blur_kind=kind, k=k, sigma=sigma)

    def sample_color(self, rng: np.random.Generator) -> ColorAdjustParams:
        return ColorAdjustParams(alpha=self.color_alpha.uniform(rng),
                                 beta=self.brightness_beta.uniform(rng))

    def sample_trim(self, rng: np.random.Generator) -> TrimSpec:
        k_f, sigma_f = self.final_blur
        shape = TrimShape(self.shape)
        if shape is TrimShape.CIRCLE:
            c = self.trim_circle
            return TrimSpec(shape=shape,
                            center=(c.center_x.integer(rng), c.center_y.integer(rng)),
                            radius=c.radius.integer(rng),
                            final_blur=(int(k_f), float(sigma_f)))
        if shape is TrimShape.RECTANGLE:
            r = self.trim_rect
            margins = (r.top.integer(rng), r.bottom.integer(rng),
                       r.left.integer(rng), r.right.integer(rng))
            return TrimSpec(shape=shape, margins=margins, final_blur=(int(k_f), float(sigma_f)))
        return TrimSpec(shape=shape, final_blur=(int(k_f), float(sigma_f)))


@dataclass(frozen=True)
class RunSection:
    seed: int = 0
    workers: int = 1
    run_dir: str = "runs/default"


@dataclass(frozen=True)
class DatasetSection:
    root: str = ""
    preset: Optional[str] = None


@dataclass(frozen=True)
class BudgetSection:
    fraction: float = 0.1
    al_iterations: int = 3
    initial_random_fraction: float = 0.5
    random_interleave: bool = False

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError(f"budget fraction must lie in (0, 1], got {self.fraction}")
        if self.al_iterations < 0:
            raise ConfigError("al_iterations must be >= 0")
        if not 0.0 <= self.initial_random_fraction <= 1.0:
            raise ConfigError("initial_random_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class QuerySection:
    strategy: str = "bald"
    aggregator: str = "mean"
    top_fraction: float = 0.1

    def __post_init__(self):
        if self.strategy not in ("bald", "entropy", "random"):
            raise ConfigError(f"query strategy must be bald, entropy or random, got {self.strategy}")
        if self.aggregator not in ("mean", "sum", "top_fraction"):
            raise ConfigError(f"aggregator must be mean, sum or top_fraction, got {self.aggregator}")
        if not 0.0 < self.top_fraction <= 1.0:
            raise ConfigError("top_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class MetricsSection:
    band_width: int = 20

    def __post_init__(self):
        if self.band_width < 2 or self.band_width % 2:
            raise ConfigError(f"band_width must be even and >= 2, got {self.band_width}")


@dataclass(frozen=True)
class TrainerSection:
    mode: str = "mock"
    command: str = ""
    committee_size: int = 4
    timeout_s: float = 3600.0
    retries: int = 1
    mock_gain: float = 6.0
    mock_noise: float = 0.5

    def __post_init__(self):
        if self.mode not in ("mock", "external"):
            raise ConfigError(f"trainer mode must be mock or external, got {self.mode}")
        if self.mode == "external" and not self.command.strip():
            raise ConfigError("external trainer mode needs a command")
        if self.committee_size < 1:
            raise ConfigError("committee_size must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    run: RunSection = RunSection()
    dataset: DatasetSection = DatasetSection()
    budget: BudgetSection = BudgetSection()
    synthesis: SynthesisConfig = SynthesisConfig()
    query: QuerySection = QuerySection()
    metrics: MetricsSection = MetricsSection()
    trainer: TrainerSection = TrainerSection()

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "run": _plain_section(self.run),
            "dataset": _plain_section(self.dataset),
            "budget": _plain_section(self.budget),
        }
        for name in ("synthesis", "fusion", "trim"):
            out[name] = {
                f.name: _to_yaml(getattr(self.synthesis, f.name))
                for f in fields(SynthesisConfig) if f.metadata["section"] == name
            }
        out["query"] = _plain_section(self.query)
        out["metrics"] = _plain_section(self.metrics)
        out["trainer"] = _plain_section(self.trainer)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("run config must be a mapping of sections")
        known = {"run", "dataset", "budget", "synthesis", "fusion", "trim",
                 "query", "metrics", "trainer"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")

        dataset = _build(DatasetSection, data.get("dataset"), "dataset")
        base = preset(dataset.preset) if dataset.preset else cls()

        synth_values: Dict[str, Any] = {}
        for name in ("synthesis", "fusion", "trim"):
            section = data.get(name) or {}
            if not isinstance(section, dict):
                raise ConfigError(f"[{name}] must be a mapping")
            allowed = {f.name for f in fields(SynthesisConfig) if f.metadata["section"] == name}
            extra = set(section) - allowed
            if extra:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")
            for key, value in section.items():
                synth_values[key] = _parse_synth_value(key, value)

        return cls(
            run=_build(RunSection, data.get("run"), "run", base.run),
            dataset=dataset,
            budget=_build(BudgetSection, data.get("budget"), "budget", base.budget),
            synthesis=_replace(base.synthesis, synth_values),
            query=_build(QuerySection, data.get("query"), "query", base.query),
            metrics=_build(MetricsSection, data.get("metrics"), "metrics", base.metrics),
            trainer=_build(TrainerSection, data.get("trainer"), "trainer", base.trainer),
        )


def _to_yaml(value: Any) -> Any:
    if isinstance(value, Range):
        return value.to_yaml()
    if isinstance(value, (CircleTrimRange, RectTrimRange)):
        return {f.name: getattr(value, f.name).to_yaml() for f in fields(value)}
    if isinstance(value, tuple):
        return list(value)
    return value


def _plain_section(section) -> Dict[str, Any]:
    return {f.name: _to_yaml(getattr(section, f.name)) for f in fields(section)}


def _parse_synth_value(key: str, value: Any) -> Any:
    kinds = {f.name: f.type for f in fields(SynthesisConfig)}
    kind = kinds[key]
    if kind is Range:
        return Range.parse(value, key)
    if kind in (CircleTrimRange, RectTrimRange):
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: expected a mapping")
        allowed = {f.name for f in fields(kind)}
        extra = set(value) - allowed
        if extra:
            raise ConfigError(f"unknown keys in {key}: {sorted(extra)}")
        defaults = kind()
        return replace(defaults, **{k: Range.parse(v, f"{key}.{k}") for k, v in value.items()})
    if key == "final_blur":
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError("final_blur: expected [k_f, sigma_f]")
        return (value[0], value[1])
    return value


def _replace(base, values: Dict[str, Any]):
    try:
        return replace(base, **values)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def _build(cls, section: Optional[Dict[str, Any]], name: str, base=None):
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a mapping")
    allowed = {f.name for f in fields(cls)}
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")
    return _replace(base if base is not None else cls(), section)


# -- presets ---------------------------------------------------------------

_DEFAULTS = SynthesisConfig()

PRESETS: Dict[str, RunConfig] = {
    "live": RunConfig(
        dataset=DatasetSection(preset="live"),
        synthesis=_DEFAULTS,
    ),
    "cadaver": RunConfig(
        dataset=DatasetSection(preset="cadaver"),
        synthesis=replace(_DEFAULTS, fusion_k=Range(5, 10)),
    ),
    "endovis": RunConfig(
        dataset=DatasetSection(preset="endovis"),
        synthesis=replace(
            _DEFAULTS,
            type1_per_query=0,
            type2_per_query=1,
            multi_blend=2,
            external_backgrounds=False,
            background_inpainting=True,
            move_w=Range(-0.05, 0.05),
            move_h=Range(-0.05, 0.05),
            shape="rectangle",
        ),
    ),
}


def preset(name: str) -> RunConfig:
    """Synthesis and budget settings tuned for a dataset (live, cadaver, endovis)"""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def load_config(source: Union[str, Path, Dict[str, Any]],
                preset_name: Optional[str] = None) -> RunConfig:
    """
    Parse a YAML run file (path or already-loaded mapping). `preset_name`
    replaces dataset.preset; keys in the file override the preset.
    """
    if isinstance(source, dict):
        return RunConfig.from_dict(_with_preset(source, preset_name))
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}") from e
    return RunConfig.from_dict(_with_preset(data, preset_name))


def _with_preset(data: Any, preset_name: Optional[str]) -> Any:
    if preset_name is None or not isinstance(data, (dict, type(None))):
        return data
    data = copy.deepcopy(data) if data else {}
    section = data.get("dataset") or {}
    data["dataset"] = dict(section, preset=preset_name)
    return data


def dump_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=None)


def resolve_seed(flag: Optional[int], config: Optional[RunConfig] = None) -> int:
    """--seed flag wins over SYNTHAL_SEED, which wins over run.seed"""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return config.run.seed if config is not None else 0
