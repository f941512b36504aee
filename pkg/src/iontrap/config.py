"""Run configuration: flat ``dotted.key = value`` text with frequencies in Hz.

Recognized keys and defaults::

    trap.omega_sec_hz        = 1.32e6
    trap.eta                 = 0.0616
    laser.omega_hz           = 125e3
    laser.delta0_hz          = -500    # detuning-independent shift as the offset b of |shift| = A/x + b
    noise.linewidth_hz       = 300
    noise.intensity_fast_pp  = 0.001
    noise.intensity_slow_pp  = 0.01
    noise.heating_quanta_per_s = 0
    execution.mode           = physical   # idealized | physical
    execution.shots          = exact      # exact | <int>
    execution.seed           = 0
    execution.n_trajectories = 100
    execution.workers        = 1
    output.directory         = out
    output.formats           = csv

``laser.delta0_hz`` is quoted the way the Stark-scan fit reports it: the
scan offset b equals minus the detuning-independent term of the shift model.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .frames import TWO_PI, TrapLaserParams
from .noiselab.noise import NoiseModel


_DIGEST_EXCLUDED = frozenset({"output.directory", "execution.workers"})


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


DEFAULTS: dict[str, str] = {
    "trap.omega_sec_hz": "1.32e6",
    "trap.eta": "0.0616",
    "laser.omega_hz": "125e3",
    "laser.delta0_hz": "-500",
    "noise.linewidth_hz": "300",
    "noise.intensity_fast_pp": "0.001",
    "noise.intensity_slow_pp": "0.01",
    "noise.heating_quanta_per_s": "0",
    "execution.mode": "physical",
    "execution.shots": "exact",
    "execution.seed": "0",
    "execution.n_trajectories": "100",
    "execution.workers": "1",
    "output.directory": "out",
    "output.formats": "csv",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ConfigError: On malformed lines, unknown keys or duplicates.
    """
    out: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw.strip()!r}")
        if key not in DEFAULTS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration (values as text, typed accessors below)."""

    values: tuple[tuple[str, str], ...]

    @classmethod
    def from_mapping(cls, overrides: dict[str, str] | None = None) -> "RunConfig":
        merged = dict(DEFAULTS)
        for k, v in (overrides or {}).items():
            if k not in DEFAULTS:
                raise ConfigError(f"unknown key {k!r}")
            merged[k] = str(v)
        cfg = cls(tuple(sorted(merged.items())))
        cfg.validate()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc

    def with_(self, **overrides) -> "RunConfig":
        d = dict(self.values)
        d.update({k.replace("__", "."): str(v) for k, v in overrides.items()})
        return RunConfig.from_mapping(d)

    def get(self, key: str) -> str:
        return dict(self.values)[key]

    def _float(self, key: str) -> float:
        try:
            return float(self.get(key))
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {self.get(key)!r}") from exc

    def _int(self, key: str) -> int:
        try:
            return int(self.get(key))
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {self.get(key)!r}") from exc

    def validate(self) -> None:
        for key in ("trap.omega_sec_hz", "trap.eta", "laser.omega_hz"):
            if not self._float(key) > 0:
                raise ConfigError(f"{key} must be positive")
        self._float("laser.delta0_hz")
        for key in ("noise.linewidth_hz", "noise.intensity_fast_pp", "noise.intensity_slow_pp",
                    "noise.heating_quanta_per_s"):
            if self._float(key) < 0:
                raise ConfigError(f"{key} must be non-negative")
        if self.mode not in ("idealized", "physical"):
            raise ConfigError("execution.mode must be 'idealized' or 'physical'")
        self.shots  # noqa: B018 (validates)
        self._int("execution.seed")
        if self.n_trajectories < 1 or self.workers < 1:
            raise ConfigError("execution.n_trajectories and execution.workers must be >= 1")
        if self.get("output.formats") != "csv":
            raise ConfigError("output.formats must be 'csv' (CSV and plain-text files)")

    @property
    def params(self) -> TrapLaserParams:
        try:
            return TrapLaserParams(
                omega_sec=TWO_PI * self._float("trap.omega_sec_hz"),
                eta=self._float("trap.eta"),
                Omega=TWO_PI * self._float("laser.omega_hz"),
                Delta0=-TWO_PI * self._float("laser.delta0_hz"),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(
            laser_linewidth_equiv=TWO_PI * self._float("noise.linewidth_hz"),
            intensity_fast_pp=self._float("noise.intensity_fast_pp"),
            intensity_slow_pp=self._float("noise.intensity_slow_pp"),
            heating_rate=self._float("noise.heating_quanta_per_s"),
            rng_seed=self.seed,
        )

    @property
    def mode(self) -> str:
        return self.get("execution.mode")

    @property
    def shots(self) -> int | None:
        v = self.get("execution.shots")
        if v == "exact":
            return None
        try:
            n = int(v)
        except ValueError as exc:
            raise ConfigError("execution.shots must be 'exact' or a positive integer") from exc
        if n < 1:
            raise ConfigError("execution.shots must be positive")
        return n

    @property
    def seed(self) -> int:
        return self._int("execution.seed")

    @property
    def n_trajectories(self) -> int:
        return self._int("execution.n_trajectories")

    @property
    def workers(self) -> int:
        return self._int("execution.workers")

    @property
    def out_dir(self) -> str:
        return self.get("output.directory")

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.values)

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical text, first 16 hex digits.

        Keys that cannot change results (output directory, worker count) are
        left out so identical runs carry identical headers.
        """
        text = "".join(f"{k} = {v}\n" for k, v in self.values if k not in _DIGEST_EXCLUDED)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def frequency_hz(x: float) -> float:
    """rad/s to Hz."""
    return float(x) / TWO_PI


__all__ = ["ConfigError", "DEFAULTS", "RunConfig", "parse_config_text", "frequency_hz"]
