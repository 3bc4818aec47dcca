"""Scenario configuration and pre-configured SNR ladder construction."""

import math
from dataclasses import dataclass, replace


class ConfigError(ValueError):
    """Raised when a scenario configuration violates its invariants."""


class DegenerateConfigError(ValueError):
    """Raised when a structurally valid configuration makes the AoI undefined
    (e.g. the effective activation probability is zero, so no update is ever
    delivered)."""


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario parameterization.

    All quantities are linear scale; dB conversion happens only at the CLI
    boundary (see :func:`db_to_linear`).
    """

    m: int                      # number of source nodes
    k: int                      # number of pre-configured received SNR levels
    lam: float                  # per-slot packet arrival probability
    p_tx: float                 # attempted transmission probability
    q: tuple                    # level-selection distribution, length k
    power: float                # transmit power budget, linear scale
    rate: float                 # target rate in bits/s/Hz
    slot_duration: float = 1.0  # slot length in time units

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))


def uniform_q(k: int) -> tuple:
    return (1.0 / k,) * k


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def validate_config(cfg: SystemConfig) -> list:
    """Return the list of violated invariants (empty when valid).

    Pure diagnostic; never raises.
    """
    problems = []
    if cfg.m < 1:
        problems.append("m must be a positive integer")
    if cfg.k < 1:
        problems.append("k must be a positive integer")
    if not 0.0 < cfg.lam <= 1.0:
        problems.append("lambda must be in (0,1]")
    if not 0.0 < cfg.p_tx <= 1.0:
        problems.append("p_tx must be in (0,1]")
    if len(cfg.q) != cfg.k:
        problems.append("q must have exactly k entries")
    if any(v < 0.0 for v in cfg.q):
        problems.append("q entries must be nonnegative")
    elif cfg.q and abs(sum(cfg.q) - 1.0) > 1e-12:
        problems.append("q must sum to 1")
    if cfg.power <= 0.0:
        problems.append("power must be positive (linear scale)")
    if cfg.rate <= 0.0:
        problems.append("rate must be positive")
    if cfg.slot_duration <= 0.0:
        problems.append("slot_duration must be positive")
    return problems


def require_valid(cfg: SystemConfig) -> None:
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))


@dataclass(frozen=True)
class SnrLadder:
    """Descending received SNR levels plus the effective access probabilities
    after marginalizing power feasibility.

    ``levels[k]`` is the target received SNR of level k (strictly decreasing).
    ``bar_p_tx`` is the actual activation probability and ``bar_q`` the
    conditional level-selection distribution of an actually active node.
    """

    levels: tuple
    bar_p_tx: float
    bar_q: tuple


def configure_snr_ladder(cfg: SystemConfig) -> SnrLadder:
    """Build the SNR ladder and effective access probabilities for ``cfg``.

    The bottom level carries the target rate on its own; each level above is
    sized so that it still decodes at the target rate when every one of the
    other m-1 nodes interferes from the level below:

        levels[k-1] = 2^rate - 1
        levels[j]   = (2^rate - 1) * (1 + (m-1) * levels[j+1])

    A node that picked level j stays silent whenever inverting the channel
    would exceed the power budget, which thins the access probabilities to
    bar_p_tx = p_tx * sum_j q_j * exp(-levels[j]/power) and reweights q to
    bar_q accordingly.
    """
    require_valid(cfg)
    base = 2.0 ** cfg.rate - 1.0
    levels = [base]
    for _ in range(cfg.k - 1):
        levels.insert(0, base * (1.0 + (cfg.m - 1) * levels[0]))

    weights = [qj * math.exp(-pj / cfg.power) for qj, pj in zip(cfg.q, levels)]
    total = sum(weights)
    if total <= 0.0:
        raise DegenerateConfigError(
            "power budget too low: every SNR level is infeasible almost surely"
        )
    bar_p_tx = cfg.p_tx * total
    bar_q = tuple(w / total for w in weights)
    return SnrLadder(levels=tuple(levels), bar_p_tx=bar_p_tx, bar_q=bar_q)


# --- flat key/value scenario files -----------------------------------------

CONFIG_FILE_KEYS = ("m", "k", "lambda", "p_tx", "q", "power_db", "rate",
                    "slot_duration")


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` scenario file.

    Recognized keys: m, k, lambda, p_tx, q (comma list or "uniform"),
    power_db, rate, slot_duration.  Lines starting with '#' are ignored.
    """
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            elif ":" in line:
                key, _, val = line.partition(":")
            else:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip().lower()
            val = val.strip()
            if key not in CONFIG_FILE_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = val
    return values


def config_from_mapping(values: dict) -> SystemConfig:
    """Build a :class:`SystemConfig` from the flat-file schema (strings or
    typed values accepted; ``power_db`` is converted to linear scale here)."""
    def get(key, cast, default=None):
        if key not in values or values[key] is None:
            if default is None:
                raise ConfigError(f"missing required config key {key!r}")
            return default
        return cast(values[key])

    m = get("m", int)
    k = get("k", int)
    q_raw = values.get("q", "uniform")
    if isinstance(q_raw, str):
        q = uniform_q(k) if q_raw.strip().lower() == "uniform" else tuple(
            float(part) for part in q_raw.split(","))
    else:
        q = tuple(float(v) for v in q_raw)
    return SystemConfig(
        m=m,
        k=k,
        lam=get("lambda", float),
        p_tx=get("p_tx", float),
        q=q,
        power=db_to_linear(get("power_db", float)),
        rate=get("rate", float),
        slot_duration=get("slot_duration", float, 1.0),
    )


def with_overrides(cfg: SystemConfig, **kwargs) -> SystemConfig:
    """Functional update helper (thin wrapper over dataclasses.replace)."""
    return replace(cfg, **kwargs)
