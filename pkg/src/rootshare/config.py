"""Protocol configuration: one object tying codec, seed, flooding and
Newton settings together, plus a small key=value file loader for the CLI."""

import os
from dataclasses import dataclass, replace

from .errors import ConfigError
from .flood import FloodConfig
from .ring import FixedPointCodec
from .rsqrt import NewtonConfig, SeedParams


@dataclass(frozen=True)
class ProtocolConfig:
    """Bundle of all tunables one protocol run needs.

    The flood constant and the two reference exponents appear both in the
    flooding layer and in the seed constants; construction enforces that
    the two views agree so a partial override cannot desynchronize them.
    """

    codec: FixedPointCodec = FixedPointCodec()
    seed: SeedParams = SeedParams()
    newton: NewtonConfig = NewtonConfig()
    flood: FloodConfig = FloodConfig()
    sampler_log2_mean: float = 1.4
    sampler_log2_std: float = 0.45

    def __post_init__(self):
        if self.seed.F != self.flood.F:
            raise ConfigError("seed and flood disagree on the flood constant")
        if self.seed.E_f != self.flood.E_f or self.seed.E_m != self.flood.E_m:
            raise ConfigError("seed and flood disagree on reference exponents")
        if self.sampler_log2_std < 0:
            raise ConfigError("sampler spread must be non-negative")

    def with_site(self, E_m: int | None = None, iterations: int | None = None,
                  strategy: str | None = None) -> "ProtocolConfig":
        """Per-call-site variant: same codec and flood constant, but a
        different expected-magnitude exponent or iteration budget."""
        seed = self.seed
        flood = self.flood
        if E_m is not None:
            seed = replace(seed, E_m=E_m)
            flood = replace(flood, E_m=E_m)
        newton = self.newton
        if iterations is not None or strategy is not None:
            newton = replace(
                self.newton,
                iterations=self.newton.iterations if iterations is None else iterations,
                strategy=self.newton.strategy if strategy is None else strategy,
            )
        return replace(self, seed=seed, flood=flood, newton=newton)


DEFAULT_CONFIG = ProtocolConfig()

_INT_KEYS = {"l", "f", "E_f", "E_m", "iterations"}
_FLOAT_KEYS = {"b", "F", "mask_spread", "sampler_log2_mean", "sampler_log2_std"}
_STR_KEYS = {"strategy"}
_KEY_ALIASES = {"n": "iterations"}


def config_from_mapping(mapping: dict) -> ProtocolConfig:
    """Build a ProtocolConfig from flat key=value pairs.

    Recognized keys: l, f, b, F, E_f, E_m, mask_spread, iterations (alias
    n), strategy, sampler_log2_mean, sampler_log2_std. Unknown keys raise
    ConfigError so typos never silently fall back to defaults.
    """
    values = {}
    for raw_key, raw_value in mapping.items():
        key = _KEY_ALIASES.get(raw_key, raw_key)
        if key in _INT_KEYS:
            try:
                values[key] = int(raw_value)
            except (TypeError, ValueError):
                raise ConfigError(f"{raw_key} needs an integer, got {raw_value!r}")
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(raw_value)
            except (TypeError, ValueError):
                raise ConfigError(f"{raw_key} needs a number, got {raw_value!r}")
        elif key in _STR_KEYS:
            values[key] = str(raw_value)
        else:
            raise ConfigError(f"unknown configuration key {raw_key!r}")

    base = DEFAULT_CONFIG
    codec = FixedPointCodec(
        l=values.get("l", base.codec.l),
        f=values.get("f", base.codec.f),
    )
    seed = SeedParams(
        b=values.get("b", base.seed.b),
        F=values.get("F", base.seed.F),
        E_f=values.get("E_f", base.seed.E_f),
        E_m=values.get("E_m", base.seed.E_m),
    )
    flood = FloodConfig(
        F=values.get("F", base.flood.F),
        mask_spread=values.get("mask_spread", base.flood.mask_spread),
        E_f=values.get("E_f", base.flood.E_f),
        E_m=values.get("E_m", base.flood.E_m),
    )
    newton = NewtonConfig(
        iterations=values.get("iterations", base.newton.iterations),
        strategy=values.get("strategy", base.newton.strategy),
    )
    return ProtocolConfig(
        codec=codec, seed=seed, newton=newton, flood=flood,
        sampler_log2_mean=values.get("sampler_log2_mean", base.sampler_log2_mean),
        sampler_log2_std=values.get("sampler_log2_std", base.sampler_log2_std),
    )


def load_config_file(path: str) -> ProtocolConfig:
    """Read key=value lines (# comments, blank lines allowed)."""
    if not os.path.isfile(path):
        raise ConfigError(f"configuration file not found: {path}")
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, value = text.partition("=")
            mapping[key.strip()] = value.strip()
    return config_from_mapping(mapping)
