"""Configuration dataclasses and strict JSON loading.

Unknown keys are rejected everywhere: a typo in an experiment config must
fail loudly rather than silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, asdict

from .geometry import ConfigError
from .gridding import make_gridspec

DIRECTION_MODES = ("both", "o2i", "i2o", "random_one")
LOSS_NAMES = ("patch", "current", "opposite")
AGGREGATION_MODES = ("implicit_feature", "mean_pool", "max_pool")


@dataclass
class ModelConfig:
    """Architecture and loss weights of the view predictor.

    The defaults describe the full-scale toy model; the extractor,
    abstractor and generator knobs exist so miniature configurations
    (e.g. 16x16 views for exhaustive gradient checks) stay expressible.
    """

    dims: int = 256
    view_size: int = 64
    patch_size: int = 40
    channels: int = 1
    alpha: float = 1.0
    beta: float = 1.0
    extractor_channels: tuple[int, ...] = (8, 16, 32)
    extractor_stride: int = 2
    abstractor_blocks: tuple[int, ...] = (1, 2, 3)
    abstractor_channels: tuple[int, ...] = (8, 16, 32)
    generator_channels: int = 8
    generator_kernel: int = 4
    generator_stride: int = 4

    @property
    def generated_size(self) -> int:
        side = 4
        for _ in range(2):
            side = (side - 1) * self.generator_stride + self.generator_kernel
        return side

    def validate(self) -> "ModelConfig":
        if self.dims % 16 != 0:
            raise ConfigError(f"dims must be divisible by 16 to reshape into 4x4 maps, got {self.dims}")
        if self.channels != 1:
            raise ConfigError("only single-channel views are supported")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("loss weights must be nonnegative")
        if self.generated_size != self.view_size:
            raise ConfigError(
                f"generator emits {self.generated_size}x{self.generated_size} images "
                f"but views are {self.view_size}x{self.view_size}"
            )
        if len(self.abstractor_blocks) != len(self.abstractor_channels):
            raise ConfigError("abstractor_blocks and abstractor_channels must align")
        make_gridspec(self.view_size, self.patch_size)
        # walk the conv stacks so bad sizes fail before any training starts
        side = self.patch_size
        for _ in self.extractor_channels:
            if side < 3:
                raise ConfigError(f"extractor conv stack exhausts the {self.patch_size}px patch")
            side = (side - 3) // self.extractor_stride + 1
        side = self.generated_size
        for n_convs in self.abstractor_blocks:
            for _ in range(n_convs):
                if side < 3:
                    raise ConfigError("abstractor conv stack exhausts the generated view")
                side = side - 2
            if side < 2:
                raise ConfigError("abstractor pooling exhausts the generated view")
            side = (side - 2) // 2 + 1
        return self


def mini_model_config() -> ModelConfig:
    """A 16x16 configuration small enough for end-to-end gradient checks."""
    return ModelConfig(
        dims=16,
        view_size=16,
        patch_size=12,
        extractor_channels=(4,),
        abstractor_blocks=(1, 1),
        abstractor_channels=(4, 4),
        generator_channels=4,
        generator_kernel=2,
        generator_stride=2,
    ).validate()


@dataclass
class TrainConfig:
    epochs: int = 30
    feature_lr: float = 5e-4
    net_lr: float = 2e-4
    direction_mode: str = "both"
    loss_mask: tuple[str, ...] = LOSS_NAMES
    aggregation: str = "implicit_feature"
    use_global_feature: bool = True
    pairs_per_step: int = 1
    seed: int = 0

    def validate(self) -> "TrainConfig":
        if self.direction_mode not in DIRECTION_MODES:
            raise ConfigError(f"direction_mode must be one of {DIRECTION_MODES}")
        if self.aggregation not in AGGREGATION_MODES:
            raise ConfigError(f"aggregation must be one of {AGGREGATION_MODES}")
        mask = tuple(self.loss_mask)
        if not mask:
            raise ConfigError("loss_mask must enable at least one loss")
        for name in mask:
            if name not in LOSS_NAMES:
                raise ConfigError(f"unknown loss {name!r}; valid: {LOSS_NAMES}")
        if "opposite" in mask and "current" not in mask:
            raise ConfigError("the opposite-view loss consumes the generated current view; enable 'current' too")
        if self.aggregation == "implicit_feature" and not self.use_global_feature:
            raise ConfigError("implicit aggregation is the global feature; it cannot be disabled")
        if self.epochs < 1 or self.pairs_per_step < 1:
            raise ConfigError("epochs and pairs_per_step must be positive")
        if self.feature_lr <= 0 or self.net_lr <= 0:
            raise ConfigError("learning rates must be positive")
        return self


@dataclass
class ProbeConfig:
    l2_weight: float = 1e-4
    iters: int = 500
    lr: float = 0.5
    seed: int = 0


@dataclass
class DataConfig:
    classes: int = 4
    train_per_class: int = 8
    test_per_class: int = 4
    view_size: int = 64
    seed: int = 0

    def validate(self) -> "DataConfig":
        if not 1 <= self.classes <= 4:
            raise ConfigError("classes must be between 1 and 4")
        if self.train_per_class < 1 or self.test_per_class < 0:
            raise ConfigError("per-class counts must be sensible")
        if self.view_size < 8:
            raise ConfigError("view_size must be at least 8")
        return self


_TUPLE_FIELDS = {"loss_mask", "extractor_channels", "abstractor_blocks", "abstractor_channels"}


def _from_dict(cls, payload: dict, section: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {sorted(unknown)}")
    coerced = {k: tuple(v) if k in _TUPLE_FIELDS and isinstance(v, list) else v for k, v in payload.items()}
    obj = cls(**coerced)
    return obj.validate() if hasattr(obj, "validate") else obj


_SECTIONS = {
    "data": DataConfig,
    "model": ModelConfig,
    "train": TrainConfig,
    "probe": ProbeConfig,
}


@dataclass
class RunConfig:
    data: DataConfig = field(default_factory=lambda: DataConfig().validate())
    model: ModelConfig = field(default_factory=lambda: ModelConfig().validate())
    train: TrainConfig = field(default_factory=lambda: TrainConfig().validate())
    probe: ProbeConfig = field(default_factory=ProbeConfig)

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in _SECTIONS}


def load_run_config(payload: dict) -> RunConfig:
    unknown = set(payload) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown top-level config section(s): {sorted(unknown)}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        kwargs[name] = _from_dict(cls, payload.get(name, {}), name)
    cfg = RunConfig(**kwargs)
    if cfg.data.view_size != cfg.model.view_size:
        raise ConfigError(
            f"data.view_size {cfg.data.view_size} != model.view_size {cfg.model.view_size}"
        )
    return cfg
