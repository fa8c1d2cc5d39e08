"""Synthetic turbofan-surrogate dataset generator.

Produces 13-channel condition-monitoring series at 1 Hz: three flight-regime
inputs (altitude, Mach, power-lever angle) follow smooth wander profiles, the
other ten channels come from a fixed nonlinear static response map of those
inputs, plus small Gaussian channel noise.  Faults are fixed sparse
displacement directions in channel space, one per (component, type) pair,
scaled by a percent magnitude.

Rows are tagged with a split (S_T labeled-healthy train, S_V labeled-healthy
validation, D_U unlabeled mixed pool, D_T test pool), the training-visible
health label h_s (1 healthy, 0 faulty, -1 unknown), and the generator-only
ground-truth state id (0 healthy, 1..C per fault).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

CHANNELS = (
    "alt", "MN", "PLA",
    "Wf", "N_LPC", "N_HPC", "S45_Tt", "Pa",
    "S2_Pt", "S25_Pt", "S36_Pt", "S5_Pt", "VAFN",
)
N_CHANNELS = len(CHANNELS)

SPLITS = ("S_T", "S_V", "D_U", "D_T")
FAULT_DESTINATIONS = ("D_U", "D_T")

COMPONENTS = ("Fan", "LPC", "HPC", "HPT", "LPT")
FAULT_TYPES = ("Efficiency", "Capacity")

FLIGHT_INTERVALS = {
    # name: (alt lo, alt hi), (MN lo, hi), (PLA lo, hi)
    "S1": ((27200.0, 29500.0), (0.722, 0.729), (66.9, 80.0)),
    "S2": ((29000.0, 31000.0), (0.722, 0.729), (66.9, 80.0)),
    "S3": ((28200.0, 30600.0), (0.722, 0.729), (67.5, 80.0)),
}

# Per-channel measurement noise sigma at noise_scale = 1.
NOISE_SIGMA = np.array([
    6.0,      # alt
    0.0003,   # MN
    0.12,     # PLA
    0.004,    # Wf
    4.0,      # N_LPC
    8.0,      # N_HPC
    1.2,      # S45_Tt
    0.004,    # Pa
    0.006,    # S2_Pt
    0.012,    # S25_Pt
    0.12,     # S36_Pt
    0.008,    # S5_Pt
    2.5,      # VAFN
])

# Displacement per 1 % fault magnitude, in channel units.  Each
# (component, type) pair touches its own sparse channel subset so the
# directions stay distinguishable.
FAULT_SIGNATURES = {
    ("Fan", "Efficiency"): {"Wf": 0.18, "N_LPC": 156.0, "VAFN": -108.0},
    ("Fan", "Capacity"): {"N_LPC": -180.0, "S25_Pt": -0.33, "VAFN": 132.0},
    ("LPC", "Efficiency"): {"Wf": 0.156, "S25_Pt": -0.39, "S45_Tt": 33.0},
    ("LPC", "Capacity"): {"N_LPC": 120.0, "S25_Pt": -0.51, "S36_Pt": -3.3},
    ("HPC", "Efficiency"): {"Wf": 0.204, "N_HPC": 252.0, "S45_Tt": 48.0},
    ("HPC", "Capacity"): {"N_HPC": -288.0, "S36_Pt": -5.7, "S45_Tt": 36.0},
    ("HPT", "Efficiency"): {"Wf": 0.18, "S45_Tt": 54.0, "N_HPC": -216.0, "S36_Pt": 3.6},
    ("HPT", "Capacity"): {"S36_Pt": -5.1, "S45_Tt": -42.0, "N_HPC": 192.0},
    ("LPT", "Efficiency"): {"S5_Pt": -0.30, "N_LPC": -144.0, "S45_Tt": 36.0},
    ("LPT", "Capacity"): {"S5_Pt": 0.36, "N_LPC": 108.0, "S45_Tt": -30.0, "VAFN": 90.0},
}

MIN_DETECTABILITY = 3.0  # noise-normalized displacement floor per fault segment

GENERATION_SPEC_VERSION = 1

CSV_HEADER = ("t",) + CHANNELS + ("split", "h_s", "state")

_HS_TO_TEXT = {1: "1", 0: "0", -1: "?"}
_TEXT_TO_HS = {"1": 1, "0": 0, "?": -1}


class CsvParseError(ValueError):
    """Malformed dataset CSV; carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DetectabilityError(ValueError):
    """A configured fault would sit closer than 3 noise sigma to healthy."""


@dataclass
class FaultSpec:
    """One injected fault segment."""

    state: int             # ground-truth id, 1-based
    component: str
    fault_type: str
    magnitude: float       # percent
    flight: str = "S1"
    destination: str = "D_U"
    duration: int = 200    # seconds at 1 Hz

    def validate(self):
        by_name = {c.lower(): c for c in COMPONENTS}
        if str(self.component).lower() not in by_name:
            raise ValueError(
                f"unknown component {self.component!r}; expected one of {COMPONENTS}")
        self.component = by_name[str(self.component).lower()]
        by_type = {t.lower(): t for t in FAULT_TYPES}
        if str(self.fault_type).lower() not in by_type:
            raise ValueError(
                f"unknown fault type {self.fault_type!r}; expected one of {FAULT_TYPES}")
        self.fault_type = by_type[str(self.fault_type).lower()]
        if self.flight not in FLIGHT_INTERVALS:
            raise ValueError(f"unknown flight interval {self.flight!r}")
        if self.destination not in FAULT_DESTINATIONS:
            raise ValueError(f"fault destination must be one of {FAULT_DESTINATIONS}")
        if self.magnitude < 0:
            raise ValueError("fault magnitude must be >= 0")
        if self.duration < 1:
            raise ValueError("fault duration must be >= 1 second")
        if self.state < 1:
            raise ValueError("fault state ids start at 1 (0 is healthy)")


@dataclass
class GenerationSpec:
    healthy_seconds: int = 10000
    unlabeled_healthy_seconds: int = 500
    validation_fraction: float = 0.06
    noise_scale: float = 1.0
    faults: list = field(default_factory=list)

    _ALLOWED_KEYS = {
        "version", "healthy_seconds", "unlabeled_healthy_seconds",
        "validation_fraction", "noise_scale", "faults",
    }
    _ALLOWED_FAULT_KEYS = {
        "state", "component", "type", "magnitude", "flight", "destination", "duration",
    }

    def validate(self):
        if self.healthy_seconds < 50:
            raise ValueError("healthy_seconds must be at least 50")
        if self.unlabeled_healthy_seconds < 0:
            raise ValueError("unlabeled_healthy_seconds must be >= 0")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must sit strictly inside (0, 1)")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")
        seen = set()
        for f in self.faults:
            f.validate()
            if f.state in seen:
                raise ValueError(f"duplicate fault state id {f.state}")
            seen.add(f.state)

    def to_dict(self):
        return {
            "version": GENERATION_SPEC_VERSION,
            "healthy_seconds": self.healthy_seconds,
            "unlabeled_healthy_seconds": self.unlabeled_healthy_seconds,
            "validation_fraction": self.validation_fraction,
            "noise_scale": self.noise_scale,
            "faults": [
                {
                    "state": f.state,
                    "component": f.component,
                    "type": f.fault_type,
                    "magnitude": f.magnitude,
                    "flight": f.flight,
                    "destination": f.destination,
                    "duration": f.duration,
                }
                for f in self.faults
            ],
        }

    @classmethod
    def from_dict(cls, payload):
        unknown = set(payload) - cls._ALLOWED_KEYS
        if unknown:
            raise ValueError(f"unknown generation-spec keys: {sorted(unknown)}")
        version = payload.get("version", GENERATION_SPEC_VERSION)
        if version != GENERATION_SPEC_VERSION:
            raise ValueError(f"unsupported generation-spec version {version!r}")
        faults = []
        for k, raw in enumerate(payload.get("faults", [])):
            bad = set(raw) - cls._ALLOWED_FAULT_KEYS
            if bad:
                raise ValueError(f"unknown fault keys {sorted(bad)} in fault #{k + 1}")
            faults.append(FaultSpec(
                state=int(raw.get("state", k + 1)),
                component=raw["component"],
                fault_type=raw["type"],
                magnitude=float(raw["magnitude"]),
                flight=raw.get("flight", "S1"),
                destination=raw.get("destination", "D_U"),
                duration=int(raw.get("duration", 200)),
            ))
        spec = cls(
            healthy_seconds=int(payload.get("healthy_seconds", 10000)),
            unlabeled_healthy_seconds=int(payload.get("unlabeled_healthy_seconds", 500)),
            validation_fraction=float(payload.get("validation_fraction", 0.06)),
            noise_scale=float(payload.get("noise_scale", 1.0)),
            faults=faults,
        )
        spec.validate()
        return spec


def default_generation_spec():
    """Benchmark layout: 10 000 s labeled healthy, 8 unlabeled faults plus
    500 s unlabeled healthy, 9 test faults, 200 s per fault."""
    rows = [
        (1, "Fan", "Efficiency", 1.0, "S1", "D_U"),
        (2, "Fan", "Efficiency", 1.5, "S1", "D_T"),
        (3, "Fan", "Capacity", 1.0, "S1", "D_T"),
        (4, "LPC", "Efficiency", 1.5, "S1", "D_T"),
        (5, "LPC", "Capacity", 1.5, "S1", "D_T"),
        (6, "LPC", "Capacity", 2.0, "S1", "D_U"),
        (7, "HPC", "Efficiency", 1.0, "S2", "D_U"),
        (8, "HPC", "Efficiency", 1.5, "S3", "D_T"),
        (9, "HPC", "Efficiency", 2.0, "S1", "D_U"),
        (10, "HPC", "Capacity", 1.0, "S1", "D_T"),
        (11, "HPC", "Capacity", 2.0, "S2", "D_U"),
        (12, "HPT", "Efficiency", 1.0, "S1", "D_U"),
        (13, "HPT", "Efficiency", 1.5, "S3", "D_T"),
        (14, "HPT", "Efficiency", 2.0, "S1", "D_U"),
        (15, "HPT", "Capacity", 1.5, "S3", "D_T"),
        (16, "HPT", "Capacity", 2.0, "S1", "D_U"),
        (17, "LPT", "Capacity", 1.0, "S2", "D_T"),
    ]
    faults = [FaultSpec(s, c, ft, m, fl, dst) for s, c, ft, m, fl, dst in rows]
    return GenerationSpec(faults=faults)


# ---------------------------------------------------------------------------
# flight profiles and response map

def _ou_series(n, rng, sd, theta=0.05):
    """Mean-zero Ornstein-Uhlenbeck wander with stationary deviation sd."""
    if sd == 0.0:
        return np.zeros(n)
    step = sd * math.sqrt(2.0 * theta)
    eta = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = sd * eta[0]
    keep = 1.0 - theta
    for i in range(1, n):
        x[i] = keep * x[i - 1] + step * eta[i]
    return x


def _healthy_conditions(n, rng):
    """Cruise profile spanning two stable altitudes with a transient between."""
    n1 = int(0.45 * n)
    nt = max(min(int(0.10 * n), n - n1), 0)
    n2 = n - n1 - nt
    alt = np.concatenate([
        np.full(n1, 28000.0),
        np.linspace(28000.0, 30500.0, nt),
        np.full(n2, 30500.0),
    ]) + _ou_series(n, rng, 30.0)
    t = np.arange(n)
    pla = (73.5 + 5.8 * np.sin(2 * np.pi * t / 1700.0 + rng.uniform(0, 2 * np.pi))
           + _ou_series(n, rng, 0.5))
    mn = (0.7255 + 0.0028 * np.sin(2 * np.pi * t / 2300.0 + rng.uniform(0, 2 * np.pi))
          + _ou_series(n, rng, 0.0003))
    return alt, np.clip(mn, 0.722, 0.729), np.clip(pla, 67.0, 80.0)


def _interval_series(n, lo, hi, rng, period=600.0):
    """Slow wander confined to [lo, hi]; collapses to a flat line when lo == hi."""
    width = hi - lo
    if width == 0.0:
        return np.full(n, lo) + _ou_series(n, rng, 0.0)
    center = lo + width * rng.uniform(0.35, 0.65)
    t = np.arange(n)
    series = (center
              + 0.15 * width * np.sin(2 * np.pi * t / period + rng.uniform(0, 2 * np.pi))
              + _ou_series(n, rng, 0.03 * width))
    return np.clip(series, lo, hi)


def _fault_conditions(n, flight, rng):
    (alo, ahi), (mlo, mhi), (plo, phi) = FLIGHT_INTERVALS[flight]
    alt = _interval_series(n, alo, ahi, rng)
    mn = _interval_series(n, mlo, mhi, rng)
    pla = _interval_series(n, plo, phi, rng)
    return alt, mn, pla


def _response_map(alt, mn, pla):
    """Static nonlinear map from (alt, MN, PLA) to the ten response channels."""
    a = (alt - 29000.0) / 2000.0
    m = (mn - 0.7255) / 0.0035
    p = (pla - 73.5) / 6.5

    pa = 14.696 * (1.0 - 6.87535e-6 * alt) ** 5.2559
    ram = (1.0 + 0.2 * mn * mn) ** 3.5
    s2_pt = pa * ram

    wf = 2.30 + 0.30 * np.tanh(0.9 * p) + 0.06 * p * p - 0.11 * a + 0.045 * m + 0.03 * p * m
    n_lpc = 4300.0 + 255.0 * np.tanh(0.8 * p) + 42.0 * m - 65.0 * a + 18.0 * p * m
    n_hpc = 21200.0 + 540.0 * np.tanh(0.7 * p) + 75.0 * m - 120.0 * a + 22.0 * p * p
    s45_tt = 1895.0 + 92.0 * np.tanh(0.85 * p) + 17.0 * p * p - 26.0 * a + 11.0 * m
    s25_pt = s2_pt * (1.55 + 0.13 * np.tanh(0.9 * p) + 0.012 * m)
    s36_pt = s25_pt * (9.4 + 1.25 * np.tanh(0.9 * p) + 0.18 * m - 0.08 * a)
    s5_pt = s2_pt * (1.18 + 0.085 * np.tanh(p) - 0.02 * a + 0.01 * m)
    vafn = 3200.0 - 175.0 * np.tanh(0.9 * p) + 32.0 * a - 16.0 * m

    return np.column_stack([wf, n_lpc, n_hpc, s45_tt, pa, s2_pt, s25_pt, s36_pt, s5_pt, vafn])


def fault_displacement(fault):
    """Channel-space displacement vector for a fault at its magnitude."""
    delta = np.zeros(N_CHANNELS)
    signature = FAULT_SIGNATURES[(fault.component, fault.fault_type)]
    for name, per_pct in signature.items():
        delta[CHANNELS.index(name)] = per_pct * fault.magnitude
    return delta


def detectability(fault, noise_scale=1.0):
    """Noise-normalized displacement norm; >= 3 keeps the fault detectable."""
    delta = fault_displacement(fault)
    return float(np.linalg.norm(delta / (NOISE_SIGMA * noise_scale)))


def _segment(conditions, rng, noise_scale, delta=None):
    alt, mn, pla = conditions
    x = np.column_stack([alt, mn, pla, _response_map(alt, mn, pla)])
    x += rng.standard_normal(x.shape) * (NOISE_SIGMA * noise_scale)
    if delta is not None:
        x += delta
    return x


# ---------------------------------------------------------------------------
# dataset container

@dataclass
class Dataset:
    t: np.ndarray        # seconds, float
    X: np.ndarray        # [rows, 13] channel values
    split: np.ndarray    # one of SPLITS per row
    h_s: np.ndarray      # 1 healthy, 0 faulty, -1 unknown (training-visible)
    state: np.ndarray    # ground truth: 0 healthy, 1..C fault id (evaluation only)

    def __post_init__(self):
        m = self.X.shape[0]
        if not (len(self.t) == len(self.split) == len(self.h_s) == len(self.state) == m):
            raise ValueError("dataset columns disagree on row count")
        if self.X.shape[1] != N_CHANNELS:
            raise ValueError(f"X must have {N_CHANNELS} channels, got {self.X.shape[1]}")

    def mask(self, *splits):
        out = np.zeros(len(self.split), dtype=bool)
        for s in splits:
            if s not in SPLITS:
                raise ValueError(f"unknown split {s!r}")
            out |= self.split == s
        return out

    def rows(self, *splits):
        return self.X[self.mask(*splits)]

    def counts(self):
        return {s: int(np.sum(self.split == s)) for s in SPLITS}

    def eval_truth(self):
        """(true h_s, true state) over the D_U + D_T evaluation rows."""
        m = self.mask("D_U", "D_T")
        return (self.state[m] == 0).astype(int), self.state[m]

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for i in range(self.X.shape[0]):
                row = [repr(float(self.t[i]))]
                row += [repr(float(v)) for v in self.X[i]]
                row += [self.split[i], _HS_TO_TEXT[int(self.h_s[i])], str(int(self.state[i]))]
                writer.writerow(row)


def load_csv(path, column_map=None):
    """Read a dataset CSV; column_map renames canonical columns to the file's.

    Raises CsvParseError with a 1-based line number on malformed content.
    """
    column_map = column_map or {}
    actual_names = [column_map.get(name, name) for name in CSV_HEADER]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError("file is empty", line=1) from None
        positions = []
        for canonical, actual in zip(CSV_HEADER, actual_names):
            if actual not in header:
                raise CsvParseError(f"missing column {actual!r} (for {canonical!r})", line=1)
            positions.append(header.index(actual))

        t, x_rows, split, h_s, state = [], [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) < len(header):
                raise CsvParseError(
                    f"expected {len(header)} fields, got {len(row)}", line=line_no)
            vals = [row[p] for p in positions]
            try:
                t.append(float(vals[0]))
                x_rows.append([float(v) for v in vals[1:1 + N_CHANNELS]])
            except ValueError as exc:
                raise CsvParseError(f"bad numeric field ({exc})", line=line_no) from None
            s = vals[1 + N_CHANNELS]
            if s not in SPLITS:
                raise CsvParseError(f"unknown split tag {s!r}", line=line_no)
            hs_text = vals[2 + N_CHANNELS]
            if hs_text not in _TEXT_TO_HS:
                raise CsvParseError(f"h_s must be one of 1/0/?, got {hs_text!r}", line=line_no)
            hs = _TEXT_TO_HS[hs_text]
            try:
                st = int(vals[3 + N_CHANNELS])
            except ValueError:
                raise CsvParseError(
                    f"unknown state id {vals[3 + N_CHANNELS]!r}", line=line_no) from None
            if st < 0:
                raise CsvParseError(f"unknown state id {st}", line=line_no)
            if s in ("S_T", "S_V") and (hs != 1 or st != 0):
                raise CsvParseError(
                    "labeled splits S_T/S_V must carry h_s=1 and state=0", line=line_no)
            split.append(s)
            h_s.append(hs)
            state.append(st)
    if not x_rows:
        raise CsvParseError("no data rows", line=2)
    return Dataset(
        t=np.array(t),
        X=np.array(x_rows),
        split=np.array(split),
        h_s=np.array(h_s, dtype=int),
        state=np.array(state, dtype=int),
    )


# ---------------------------------------------------------------------------
# normalization

@dataclass
class Scaler:
    """Per-channel min/max map onto [-1, 1]; no clipping on apply."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[0] == 0:
            raise ValueError("cannot fit a scaler on zero rows")
        return cls(lo=x.min(axis=0), hi=x.max(axis=0))

    @property
    def degenerate(self):
        return self.hi == self.lo

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        span = self.hi - self.lo
        safe = np.where(self.degenerate, 1.0, span)
        out = 2.0 * (x - self.lo) / safe - 1.0
        return np.where(self.degenerate, 0.0, out)

    def invert(self, xn):
        xn = np.asarray(xn, dtype=float)
        out = self.lo + (xn + 1.0) * (self.hi - self.lo) / 2.0
        return np.where(self.degenerate, self.lo, out)

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, payload):
        return cls(np.asarray(payload["lo"], dtype=float),
                   np.asarray(payload["hi"], dtype=float))


def split_validation(n_labeled, fraction, rng):
    """Boolean validation mask over labeled rows: round(fraction * n) entries."""
    n_val = int(round(fraction * n_labeled))
    if not 0 < n_val < n_labeled:
        raise ValueError(
            f"validation fraction {fraction} leaves no usable split for {n_labeled} rows")
    mask = np.zeros(n_labeled, dtype=bool)
    mask[rng.choice(n_labeled, size=n_val, replace=False)] = True
    return mask


# ---------------------------------------------------------------------------
# generation

def generate(spec=None, seed=0):
    """Build a dataset per the generation spec, fully pinned by the seed.

    Each segment consumes its own child RNG stream, so a fault's magnitude
    never shifts the noise draws: magnitude 0 reproduces the healthy segment
    bit for bit.
    """
    if spec is None:
        spec = default_generation_spec()
    spec.validate()
    for fault in spec.faults:
        if fault.magnitude > 0 and detectability(fault, spec.noise_scale) < MIN_DETECTABILITY:
            raise DetectabilityError(
                f"fault state {fault.state} ({fault.component} {fault.fault_type} "
                f"{fault.magnitude}%) sits {detectability(fault, spec.noise_scale):.2f} "
                f"noise sigma from healthy, below the floor of {MIN_DETECTABILITY}; "
                "lower noise_scale or raise the magnitude")

    du_faults = [f for f in spec.faults if f.destination == "D_U"]
    dt_faults = [f for f in spec.faults if f.destination == "D_T"]
    n_segments = 1 + len(du_faults) + 1 + len(dt_faults)
    children = np.random.SeedSequence(seed).spawn(n_segments + 1)
    rngs = [np.random.default_rng(c) for c in children[:-1]]
    split_rng = np.random.default_rng(children[-1])

    blocks, splits, h_s, states = [], [], [], []
    k = 0

    labeled = _segment(_healthy_conditions(spec.healthy_seconds, rngs[k]),
                       rngs[k], spec.noise_scale)
    k += 1
    blocks.append(labeled)
    val_mask = split_validation(spec.healthy_seconds, spec.validation_fraction, split_rng)
    splits.append(np.where(val_mask, "S_V", "S_T"))
    h_s.append(np.ones(spec.healthy_seconds, dtype=int))
    states.append(np.zeros(spec.healthy_seconds, dtype=int))

    for fault in du_faults:
        seg = _segment(_fault_conditions(fault.duration, fault.flight, rngs[k]),
                       rngs[k], spec.noise_scale, fault_displacement(fault))
        k += 1
        blocks.append(seg)
        splits.append(np.full(fault.duration, "D_U"))
        h_s.append(np.full(fault.duration, -1, dtype=int))
        states.append(np.full(fault.duration, fault.state, dtype=int))

    if spec.unlabeled_healthy_seconds > 0:
        seg = _segment(_healthy_conditions(spec.unlabeled_healthy_seconds, rngs[k]),
                       rngs[k], spec.noise_scale)
        blocks.append(seg)
        splits.append(np.full(spec.unlabeled_healthy_seconds, "D_U"))
        h_s.append(np.full(spec.unlabeled_healthy_seconds, -1, dtype=int))
        states.append(np.zeros(spec.unlabeled_healthy_seconds, dtype=int))
    k += 1

    for fault in dt_faults:
        seg = _segment(_fault_conditions(fault.duration, fault.flight, rngs[k]),
                       rngs[k], spec.noise_scale, fault_displacement(fault))
        k += 1
        blocks.append(seg)
        splits.append(np.full(fault.duration, "D_T"))
        h_s.append(np.full(fault.duration, -1, dtype=int))
        states.append(np.full(fault.duration, fault.state, dtype=int))

    x = np.vstack(blocks)
    return Dataset(
        t=np.arange(x.shape[0], dtype=float),
        X=x,
        split=np.concatenate(splits),
        h_s=np.concatenate(h_s),
        state=np.concatenate(states),
    )
