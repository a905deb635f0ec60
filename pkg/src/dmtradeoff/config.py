"""Experiment configuration: TOML manifest plus command-line overrides."""

import os
from dataclasses import dataclass, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel_model import (
    AntennaConfig,
    PowerDelayProfile,
    build_covariance_from_correlation,
    build_covariance_from_pdp,
)

SEED_ENV = "DMTRADEOFF_SEED"
FALLBACK_SEED = 12345


class ConfigError(ValueError):
    pass


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return FALLBACK_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass(frozen=True)
class ExperimentConfig:
    pdp: tuple = (1.0,)
    correlation: tuple = None
    N: int = None
    m_t: int = 1
    m_r: int = 1
    snr_db: tuple = (10.0, 20.0, 30.0)
    rates: tuple = (0.1,)
    trials: int = 100_000
    seed: int = None
    workers: int = 1
    event: str = "levels"
    mode: str = "exact"
    min_events: int = 50

    @property
    def antennas(self):
        return AntennaConfig(self.m_t, self.m_r)

    @property
    def slots(self):
        if self.N is not None:
            return self.N
        if self.correlation is not None:
            return len(self.correlation)
        return len(self.pdp)

    def covariance(self):
        try:
            if self.correlation is not None:
                return build_covariance_from_correlation(self.correlation, self.slots)
            return build_covariance_from_pdp(PowerDelayProfile(tuple(self.pdp)), self.slots)
        except ValueError as exc:
            raise ConfigError(f"channel: {exc}") from None

    def validate(self):
        try:
            self.antennas
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.N is not None and (int(self.N) != self.N or self.N < 1):
            raise ConfigError(f"N must be a positive integer, got {self.N!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.min_events < 1:
            raise ConfigError("min_events must be at least 1")
        if not self.snr_db or not self.rates:
            raise ConfigError("snr_db and rates must be nonempty")
        for db in self.snr_db:
            if db <= 0:
                raise ConfigError(
                    f"snr_db value {db} is not above 0 dB; SNR is given in dB, not linear"
                )
        for r in self.rates:
            if not 0 <= r <= self.antennas.m_min:
                raise ConfigError(f"rate {r} outside [0, m_min={self.antennas.m_min}]")
        if self.event not in ("levels", "mi"):
            raise ConfigError(f"event must be 'levels' or 'mi', got {self.event!r}")
        if self.mode not in ("exact", "reduced"):
            raise ConfigError(f"mode must be 'exact' or 'reduced', got {self.mode!r}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be in [0, 2**64)")
        return self

    def resolved(self):
        """Fill the seed default and validate."""
        cfg = self if self.seed is not None else replace(self, seed=default_seed())
        return cfg.validate()


def parse_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex value {v!r} must be [re, im]")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"cannot parse complex value {v!r}") from None
    return complex(v)


_SECTIONS = {
    "channel": {"pdp", "correlation", "N"},
    "antennas": {"m_t", "m_r"},
    "simulation": {"snr_db", "rates", "trials", "seed", "workers", "event", "mode", "min_events"},
}


def from_mapping(data):
    """Build a config from nested sections; unknown keys are errors."""
    kwargs = {}
    for section, body in data.items():
        if section not in _SECTIONS or not isinstance(body, dict):
            raise ConfigError(f"unknown config section {section!r}")
        for key, value in body.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            kwargs[key] = value
    return coerce(ExperimentConfig(), **kwargs)


def coerce(cfg, **overrides):
    """Apply overrides (``None`` means unset) with type normalization."""
    clean = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "correlation":
            value = tuple(parse_complex(v) for v in value)
        elif key in ("pdp", "snr_db", "rates"):
            value = tuple(float(v) for v in value)
        clean[key] = value
    if "correlation" in clean and "pdp" not in clean:
        clean["pdp"] = None
    elif "pdp" in clean and "correlation" not in clean:
        clean["correlation"] = None
    if clean.get("pdp") is not None and clean.get("correlation") is not None:
        raise ConfigError("give either a power delay profile or a correlation vector, not both")
    return replace(cfg, **clean)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return from_mapping(data)


FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))
