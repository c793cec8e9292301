"""Scenario data model, validation and the ``key = value`` config format."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng

__all__ = [
    "ConfigParseError",
    "Issue",
    "RisBlockConfig",
    "Scenario",
    "ValidationError",
    "build_blocks",
    "dump_scenario",
    "gamma_from_rate",
    "load_scenario",
    "make_correlation",
    "omega_linear",
    "parse_config_text",
    "parse_scenario_text",
    "save_scenario",
    "validate",
]

TWO_PI = 2.0 * math.pi

INT_KEYS = ("n_ris", "blocks_per_ris", "elements_per_ris", "seed")
FLOAT_KEYS = (
    "tx_power_db",
    "noise_power_db",
    "obstacle_coeff",
    "rho1",
    "rho2",
    "lambda_u",
    "lambda_b",
    "fail_prob",
    "target_rate",
    "gamma_t",
    "dist_user_m",
    "dist_bs_m",
    "pathloss_exp",
    "correlation_param",
)
STR_KEYS = ("correlation_kind", "phase_mode")
SCENARIO_KEYS = INT_KEYS + FLOAT_KEYS + STR_KEYS

# order used when writing a scenario back out
KEY_ORDER = (
    "n_ris",
    "blocks_per_ris",
    "elements_per_ris",
    "tx_power_db",
    "noise_power_db",
    "obstacle_coeff",
    "rho1",
    "rho2",
    "lambda_u",
    "lambda_b",
    "fail_prob",
    "target_rate",
    "gamma_t",
    "dist_user_m",
    "dist_bs_m",
    "pathloss_exp",
    "correlation_kind",
    "correlation_param",
    "phase_mode",
    "seed",
)

DEFAULTS = {
    "obstacle_coeff": 1.0,
    "phase_mode": "random",
    "correlation_kind": "identity",
    "correlation_param": 0.0,
    "seed": 0,
}

REQUIRED = tuple(k for k in KEY_ORDER if k not in DEFAULTS and k not in ("target_rate", "gamma_t"))

CORRELATION_KINDS = ("identity", "uniform", "exponential")
PHASE_MODES = ("random", "aligned")


@dataclass(frozen=True)
class Issue:
    code: str
    field: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.field}: {self.message}"


class ValidationError(ValueError):
    """One or more scenario invariants are violated."""

    def __init__(self, issues):
        self.issues = tuple(issues)
        super().__init__("; ".join(str(i) for i in self.issues))

    @property
    def fields(self):
        return tuple(i.field for i in self.issues)

    @property
    def codes(self):
        return tuple(i.code for i in self.issues)


class ConfigParseError(ValueError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def gamma_from_rate(rate):
    """SNR threshold for a target rate r: 2**(2r) - 1."""
    return 2.0 ** (2.0 * rate) - 1.0


def omega_linear(tx_power_db, noise_power_db, obstacle_coeff=1.0):
    """P * nu / N0 in linear scale, from powers in dB."""
    return 10.0 ** ((tx_power_db - noise_power_db) / 10.0) * obstacle_coeff


def make_correlation(kind, m_prime, param=None):
    """Element correlation matrix of size ``m_prime``.

    ``identity``: no coupling. ``uniform``: every off-diagonal entry equals
    ``param``. ``exponential``: entries ``exp(-param * |l - s|)``.
    """
    m_prime = int(m_prime)
    if m_prime < 1:
        raise ValueError(f"m_prime must be >= 1, got {m_prime}")
    if kind == "identity":
        return np.eye(m_prime)
    if kind == "uniform":
        a = 0.0 if param is None else float(param)
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"uniform correlation requires a in [0, 1], got {a}")
        c = np.full((m_prime, m_prime), a)
        np.fill_diagonal(c, 1.0)
        return c
    if kind in ("exponential", "exponential-decay"):
        decay = 0.0 if param is None else float(param)
        if not (decay >= 0.0 and math.isfinite(decay)):
            raise ValueError(f"exponential correlation requires c >= 0, got {decay}")
        idx = np.arange(m_prime)
        return np.exp(-decay * np.abs(idx[:, None] - idx[None, :]))
    raise ValueError(f"unknown correlation kind {kind!r}; expected one of {CORRELATION_KINDS}")


@dataclass(frozen=True, eq=False)
class RisBlockConfig:
    """Geometry, correlation and phases of one RIS sub-surface block.

    ``ris_index`` and ``block_index`` are 1-based like the RIS/block labels
    (k, j); element arrays are 0-based.
    """

    ris_index: int
    block_index: int
    m_prime: int
    correlation: np.ndarray
    phases_psi: np.ndarray
    phases_theta: np.ndarray
    phases_phi: np.ndarray
    dist_user_m: float
    dist_bs_m: float
    pathloss_exp: float

    def __post_init__(self):
        for name in ("correlation", "phases_psi", "phases_theta", "phases_phi"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __eq__(self, other):
        if not isinstance(other, RisBlockConfig):
            return NotImplemented
        return (
            self.ris_index == other.ris_index
            and self.block_index == other.block_index
            and self.m_prime == other.m_prime
            and self.dist_user_m == other.dist_user_m
            and self.dist_bs_m == other.dist_bs_m
            and self.pathloss_exp == other.pathloss_exp
            and np.array_equal(self.correlation, other.correlation)
            and np.array_equal(self.phases_psi, other.phases_psi)
            and np.array_equal(self.phases_theta, other.phases_theta)
            and np.array_equal(self.phases_phi, other.phases_phi)
        )

    __hash__ = None

    @property
    def distance_gain(self):
        """(d_U * d_B) ** -delta, the power loss shared by every term."""
        return (self.dist_user_m * self.dist_bs_m) ** (-self.pathloss_exp)

    @property
    def flat_index(self):
        return self.ris_index, self.block_index

    def with_phases(self, psi, theta, phi):
        return dataclasses.replace(self, phases_psi=psi, phases_theta=theta, phases_phi=phi)

    def issues(self):
        out = []
        tag = f"block({self.ris_index},{self.block_index})"
        c = self.correlation
        if c.shape != (self.m_prime, self.m_prime):
            out.append(Issue("shape", f"{tag}.correlation", f"expected {self.m_prime}x{self.m_prime}, got {c.shape}"))
        else:
            if not np.all(np.isfinite(c)):
                out.append(Issue("domain", f"{tag}.correlation", "entries must be finite"))
            elif not np.array_equal(c, c.T):
                out.append(Issue("symmetry", f"{tag}.correlation", "matrix must be symmetric"))
            if np.any(np.diag(c) != 1.0):
                out.append(Issue("diagonal", f"{tag}.correlation", "diagonal entries must equal 1"))
            if np.any((c < 0.0) | (c > 1.0)):
                out.append(Issue("domain", f"{tag}.correlation", "entries must lie in [0, 1]"))
        for name in ("phases_psi", "phases_theta", "phases_phi"):
            arr = getattr(self, name)
            if arr.shape != (self.m_prime,):
                out.append(Issue("shape", f"{tag}.{name}", f"expected length {self.m_prime}, got {arr.shape}"))
            elif not np.all(np.isfinite(arr)):
                out.append(Issue("domain", f"{tag}.{name}", "phases must be finite"))
        for name in ("dist_user_m", "dist_bs_m", "pathloss_exp"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append(Issue("domain", f"{tag}.{name}", f"must be positive and finite, got {v}"))
        return out


def _draw_phases(seed, flat_block, m_prime, mode):
    # element e of block b draws from trial PHASE_TRIAL_BASE + b, slots 3e..3e+2,
    # so adding elements never reshuffles the phases of existing ones
    stream = rng.TrialStream(seed, rng.PHASE_TRIAL_BASE + flat_block)
    psi = np.empty(m_prime)
    theta = np.empty(m_prime)
    phi = np.empty(m_prime)
    for e in range(m_prime):
        psi[e] = TWO_PI * stream.uniform(flat_block, 3 * e)
        theta[e] = TWO_PI * stream.uniform(flat_block, 3 * e + 1)
        phi[e] = TWO_PI * stream.uniform(flat_block, 3 * e + 2)
    if mode == "aligned":
        # common user-side phase, reflection phase compensates: every term has phase 0
        theta[:] = theta[0]
        psi = np.mod(theta[0] + phi, TWO_PI)
    return psi, theta, phi


def build_blocks(
    n_ris,
    blocks_per_ris,
    m_prime,
    *,
    dist_user_m,
    dist_bs_m,
    pathloss_exp,
    correlation_kind="identity",
    correlation_param=0.0,
    phase_mode="random",
    seed=0,
):
    corr = make_correlation(correlation_kind, m_prime, correlation_param)
    blocks = []
    for k in range(1, n_ris + 1):
        for j in range(1, blocks_per_ris + 1):
            flat = (k - 1) * blocks_per_ris + (j - 1)
            psi, theta, phi = _draw_phases(seed, flat, m_prime, phase_mode)
            blocks.append(
                RisBlockConfig(
                    ris_index=k,
                    block_index=j,
                    m_prime=m_prime,
                    correlation=corr,
                    phases_psi=psi,
                    phases_theta=theta,
                    phases_phi=phi,
                    dist_user_m=float(dist_user_m),
                    dist_bs_m=float(dist_bs_m),
                    pathloss_exp=float(pathloss_exp),
                )
            )
    return tuple(blocks)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A validated experiment description. Build through :func:`validate`."""

    n_ris: int
    blocks_per_ris: int
    elements_per_ris: int
    tx_power_db: float
    noise_power_db: float
    obstacle_coeff: float
    rho1: float
    rho2: float
    lambda_u: float
    lambda_b: float
    fail_prob: float
    target_rate: float | None
    gamma_t: float
    dist_user_m: float
    dist_bs_m: float
    pathloss_exp: float
    correlation_kind: str
    correlation_param: float
    phase_mode: str
    seed: int
    blocks: tuple = field(repr=False)
    custom_blocks: bool = field(default=False, repr=False)

    @property
    def m_prime(self):
        return self.elements_per_ris // self.blocks_per_ris

    @property
    def n_paths(self):
        """N * J, the number of candidate blocks."""
        return self.n_ris * self.blocks_per_ris

    @property
    def omega(self):
        return omega_linear(self.tx_power_db, self.noise_power_db, self.obstacle_coeff)

    def params(self):
        """The flat config mapping (threshold given the way it was specified)."""
        out = {}
        for k in KEY_ORDER:
            if k == "gamma_t" and self.target_rate is not None:
                continue
            if k == "target_rate" and self.target_rate is None:
                continue
            out[k] = getattr(self, k)
        return out

    def replace(self, **changes):
        """Return a re-validated copy with some parameters changed.

        Blocks are regenerated from the scenario parameters unless the
        caller passes ``blocks`` explicitly.
        """
        params = self.params()
        if "gamma_t" in changes:
            params.pop("target_rate", None)
        if "target_rate" in changes:
            params.pop("gamma_t", None)
        params.update(changes)
        return validate(params)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.params() == other.params() and self.blocks == other.blocks

    __hash__ = None


def _as_number(value, kind):
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if kind is int:
        if isinstance(value, float):
            if not value.is_integer():
                raise TypeError(f"expected an integer, got {value!r}")
            return int(value)
        return int(value)
    return float(value)


def validate(raw) -> Scenario:
    """Check every invariant and return an immutable :class:`Scenario`.

    ``raw`` is a mapping of config keys (optionally with ``blocks``) or an
    existing scenario. All violations are collected and raised together as
    one :class:`ValidationError`.
    """
    if isinstance(raw, Scenario):
        data = raw.params()
        if raw.custom_blocks:
            data["blocks"] = raw.blocks
    else:
        data = dict(raw)
    issues = []

    unknown = sorted(set(data) - set(SCENARIO_KEYS) - {"blocks"})
    for k in unknown:
        issues.append(Issue("unknown", k, "not a scenario key"))

    vals = dict(DEFAULTS)
    for k, v in data.items():
        if k in unknown or k == "blocks":
            continue
        if v is None and k in ("target_rate", "gamma_t"):
            continue
        try:
            if k in INT_KEYS:
                vals[k] = _as_number(v, int)
            elif k in FLOAT_KEYS:
                vals[k] = _as_number(v, float)
            else:
                vals[k] = str(v)
        except (TypeError, ValueError) as exc:
            issues.append(Issue("type", k, str(exc)))

    for k in REQUIRED:
        if k not in vals and not any(i.field == k for i in issues):
            issues.append(Issue("missing", k, "required key not given"))

    has_rate = "target_rate" in vals
    has_gamma = "gamma_t" in vals
    if has_rate and has_gamma:
        issues.append(Issue("conflict", "target_rate|gamma_t", "give exactly one of target_rate and gamma_t"))
    elif not has_rate and not has_gamma:
        issues.append(Issue("missing", "target_rate|gamma_t", "give exactly one of target_rate and gamma_t"))

    def positive_int(name):
        v = vals.get(name)
        if v is not None and v < 1:
            issues.append(Issue("domain", name, f"must be a positive integer, got {v}"))

    for name in ("n_ris", "blocks_per_ris", "elements_per_ris"):
        positive_int(name)

    n_el, n_blk = vals.get("elements_per_ris"), vals.get("blocks_per_ris")
    if n_el and n_blk and n_el >= 1 and n_blk >= 1 and n_el % n_blk != 0:
        issues.append(
            Issue(
                "divisibility",
                "elements_per_ris",
                f"elements_per_ris mod blocks_per_ris = {n_el} mod {n_blk} = {n_el % n_blk}; "
                "elements per block must be an integer",
            )
        )

    def check(name, ok, msg):
        v = vals.get(name)
        if v is None:
            return
        if not (math.isfinite(v) and ok(v)):
            issues.append(Issue("domain", name, f"{msg}, got {v}"))

    check("tx_power_db", lambda v: True, "must be finite")
    check("noise_power_db", lambda v: True, "must be finite")
    check("obstacle_coeff", lambda v: 0.0 < v <= 1.0, "must lie in (0, 1]")
    check("rho1", lambda v: 0.0 <= v < 1.0, "rho out of domain [0, 1)")
    check("rho2", lambda v: 0.0 <= v < 1.0, "rho out of domain [0, 1)")
    check("lambda_u", lambda v: v > 0.0, "must be positive")
    check("lambda_b", lambda v: v > 0.0, "must be positive")
    check("fail_prob", lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]")
    check("target_rate", lambda v: v > 0.0, "must be positive")
    check("gamma_t", lambda v: v > 0.0, "must be positive")
    check("dist_user_m", lambda v: v > 0.0, "must be positive")
    check("dist_bs_m", lambda v: v > 0.0, "must be positive")
    check("pathloss_exp", lambda v: v > 0.0, "must be positive")

    kind = vals.get("correlation_kind")
    cparam = vals.get("correlation_param")
    if kind not in CORRELATION_KINDS:
        issues.append(Issue("domain", "correlation_kind", f"must be one of {CORRELATION_KINDS}, got {kind!r}"))
    elif cparam is not None:
        if kind == "uniform" and not 0.0 <= cparam <= 1.0:
            issues.append(Issue("domain", "correlation_param", f"uniform correlation needs a in [0, 1], got {cparam}"))
        if kind == "exponential" and not (cparam >= 0.0 and math.isfinite(cparam)):
            issues.append(Issue("domain", "correlation_param", f"exponential decay needs c >= 0, got {cparam}"))
    if vals.get("phase_mode") not in PHASE_MODES:
        issues.append(Issue("domain", "phase_mode", f"must be one of {PHASE_MODES}, got {vals.get('phase_mode')!r}"))

    if issues:
        raise ValidationError(issues)

    if has_rate:
        gamma_t = gamma_from_rate(vals["target_rate"])
        target_rate = vals["target_rate"]
    else:
        gamma_t = vals["gamma_t"]
        target_rate = None
    m_prime = vals["elements_per_ris"] // vals["blocks_per_ris"]

    custom = "blocks" in data and data["blocks"] is not None
    if custom:
        blocks = tuple(data["blocks"])
        expected = vals["n_ris"] * vals["blocks_per_ris"]
        if len(blocks) != expected:
            issues.append(Issue("blocks", "blocks", f"expected {expected} blocks (N*J), got {len(blocks)}"))
        for b in blocks:
            if b.m_prime != m_prime:
                issues.append(Issue("blocks", f"block({b.ris_index},{b.block_index}).m_prime", f"expected {m_prime}, got {b.m_prime}"))
            issues.extend(b.issues())
        if issues:
            raise ValidationError(issues)
    else:
        blocks = build_blocks(
            vals["n_ris"],
            vals["blocks_per_ris"],
            m_prime,
            dist_user_m=vals["dist_user_m"],
            dist_bs_m=vals["dist_bs_m"],
            pathloss_exp=vals["pathloss_exp"],
            correlation_kind=kind,
            correlation_param=cparam,
            phase_mode=vals["phase_mode"],
            seed=vals["seed"],
        )

    return Scenario(
        n_ris=vals["n_ris"],
        blocks_per_ris=vals["blocks_per_ris"],
        elements_per_ris=vals["elements_per_ris"],
        tx_power_db=vals["tx_power_db"],
        noise_power_db=vals["noise_power_db"],
        obstacle_coeff=vals["obstacle_coeff"],
        rho1=vals["rho1"],
        rho2=vals["rho2"],
        lambda_u=vals["lambda_u"],
        lambda_b=vals["lambda_b"],
        fail_prob=vals["fail_prob"],
        target_rate=target_rate,
        gamma_t=gamma_t,
        dist_user_m=vals["dist_user_m"],
        dist_bs_m=vals["dist_bs_m"],
        pathloss_exp=vals["pathloss_exp"],
        correlation_kind=kind,
        correlation_param=cparam,
        phase_mode=vals["phase_mode"],
        seed=vals["seed"],
        blocks=blocks,
        custom_blocks=custom,
    )


# ---------------------------------------------------------------------------
# config text format


def parse_config_text(text, extra_prefixes=()):
    """Parse ``key = value`` lines into ``{key: (raw_value, line_number)}``.

    ``#`` starts a comment. Keys other than scenario keys are rejected unless
    they start with one of ``extra_prefixes``.
    """
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigParseError("missing key before '='", line=lineno)
        if not value:
            raise ConfigParseError("missing value", line=lineno, key=key)
        if key not in SCENARIO_KEYS and not key.startswith(tuple(extra_prefixes)):
            raise ConfigParseError("unknown key", line=lineno, key=key)
        if key in entries:
            raise ConfigParseError(f"duplicate key (first set on line {entries[key][1]})", line=lineno, key=key)
        entries[key] = (value, lineno)
    if not entries:
        raise ConfigParseError("config contains no settings")
    return entries


def _convert(entries):
    out = {}
    for key, (value, lineno) in entries.items():
        try:
            if key in INT_KEYS:
                out[key] = int(value, 0)
            elif key in FLOAT_KEYS:
                out[key] = float(value)
            else:
                out[key] = value
        except ValueError:
            kind = "integer" if key in INT_KEYS else "number"
            raise ConfigParseError(f"cannot parse {value!r} as {kind}", line=lineno, key=key) from None
    return out


def parse_scenario_text(text):
    return validate(_convert(parse_config_text(text)))


def load_scenario(path) -> Scenario:
    """Read and validate a scenario config file."""
    return parse_scenario_text(Path(path).read_text(encoding="utf-8"))


def _render(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_scenario(scn) -> str:
    if scn.custom_blocks:
        raise ValueError("scenarios with hand-built blocks cannot be written as a flat config")
    lines = [f"{k} = {_render(v)}" for k, v in scn.params().items()]
    return "\n".join(lines) + "\n"


def save_scenario(scn, path):
    Path(path).write_text(dump_scenario(scn), encoding="utf-8")
