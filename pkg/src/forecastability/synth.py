"""Seeded synthetic signals: tones, Lorenz trajectories, noise, sparsification.

All randomness comes from numpy's PCG64 bit generator seeded with the
caller's integer, so identical arguments give bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AliasingError, DegenerateInputError, DivergenceError
from .timeseries import TimeSeries

RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"

SIGNAL_KINDS = ("sine", "multisine", "noisy_multisine", "lorenz", "white_noise")

DEFAULT_SINE = (5 / 256, 1.0, 0.0)
# harmonics of a 60-sample period: dense enough along the orbit that m=3, tau=1
# neighbors are true recurrences rather than projection crossings
DEFAULT_MULTISINE = ((1 / 60, 1.0, 0.0), (2 / 60, 0.7, 0.0), (3 / 60, 0.4, 0.0))


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01
    initial_state: tuple = (1.0, 1.0, 1.0)
    transient_steps: int = 1000
    observed_coordinate: str = "x"
    # integration steps per emitted sample; observation interval = dt * sample_every
    sample_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.transient_steps < 0:
            raise ValueError("transient_steps must be >= 0")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.observed_coordinate not in ("x", "y", "z"):
            raise ValueError(f"observed_coordinate must be x, y or z, got {self.observed_coordinate!r}")
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))


def gen_sine(T: int, frequency: float, amplitude: float = 1.0, phase: float = 0.0) -> TimeSeries:
    """``amplitude * sin(2*pi*frequency*t + phase)``; frequency in cycles per sample."""
    if T < 1:
        raise DegenerateInputError("T must be >= 1")
    if not 0 < frequency < 0.5:
        raise AliasingError(f"frequency must lie in (0, 0.5) cycles/sample, got {frequency}")
    t = np.arange(T)
    return TimeSeries(amplitude * np.sin(2 * np.pi * frequency * t + phase), id="sine")


def gen_multisine(T: int, components: Sequence[tuple]) -> TimeSeries:
    """Sum of ``gen_sine`` outputs for ``(frequency, amplitude, phase)`` triples."""
    if not components:
        raise DegenerateInputError("multisine needs at least one component")
    total = np.zeros(T)
    for comp in components:
        total = total + gen_sine(T, *comp).values
    return TimeSeries(total, id="multisine")


def add_gaussian_noise(series: TimeSeries, sigma: float, seed: int) -> TimeSeries:
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return series
    noise = rng(seed).standard_normal(len(series))
    return series.with_values(series.values + sigma * noise)


def gen_white_noise(T: int, sigma: float = 1.0, seed: int = 0) -> TimeSeries:
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return TimeSeries(sigma * rng(seed).standard_normal(T), id="white_noise")


def lorenz_rhs(state: np.ndarray, sigma: float, rho: float, beta: float) -> np.ndarray:
    x, y, z = state
    return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])


def rk4_step(state: np.ndarray, dt: float, sigma: float, rho: float, beta: float) -> np.ndarray:
    k1 = lorenz_rhs(state, sigma, rho, beta)
    k2 = lorenz_rhs(state + 0.5 * dt * k1, sigma, rho, beta)
    k3 = lorenz_rhs(state + 0.5 * dt * k2, sigma, rho, beta)
    k4 = lorenz_rhs(state + dt * k3, sigma, rho, beta)
    return state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def lorenz_trajectory(n_steps: int, params: LorenzParams = LorenzParams()) -> np.ndarray:
    """Full ``(n_steps, 3)`` RK4 trajectory after the transient, one row per step.

    Plain-float arithmetic; numpy per step is several times slower for a
    3-vector.
    """
    s, r, b, dt = params.sigma, params.rho, params.beta, params.dt
    x, y, z = params.initial_state
    out = np.empty((n_steps, 3))
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(params.transient_steps + n_steps):
        k1x, k1y, k1z = s * (y - x), x * (r - z) - y, x * y - b * z
        ax, ay, az = x + half * k1x, y + half * k1y, z + half * k1z
        k2x, k2y, k2z = s * (ay - ax), ax * (r - az) - ay, ax * ay - b * az
        ax, ay, az = x + half * k2x, y + half * k2y, z + half * k2z
        k3x, k3y, k3z = s * (ay - ax), ax * (r - az) - ay, ax * ay - b * az
        ax, ay, az = x + dt * k3x, y + dt * k3y, z + dt * k3z
        k4x, k4y, k4z = s * (ay - ax), ax * (r - az) - ay, ax * ay - b * az
        x = x + sixth * (k1x + 2 * k2x + 2 * k3x + k4x)
        y = y + sixth * (k1y + 2 * k2y + 2 * k3y + k4y)
        z = z + sixth * (k1z + 2 * k2z + 2 * k3z + k4z)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise DivergenceError(f"Lorenz integration blew up at step {step}")
        k = step - params.transient_steps
        if k >= 0:
            out[k] = (x, y, z)
    return out


def gen_lorenz(T: int, params: LorenzParams = LorenzParams()) -> TimeSeries:
    """``T`` samples of one Lorenz coordinate, integrated with classical RK4."""
    if T < 1:
        raise DegenerateInputError("T must be >= 1")
    traj = lorenz_trajectory((T - 1) * params.sample_every + 1, params)
    col = "xyz".index(params.observed_coordinate)
    return TimeSeries(traj[:: params.sample_every, col], id="lorenz")


def zero_positions(series: TimeSeries, count: int, seed: int) -> TimeSeries:
    """Set ``count`` distinct positions, drawn uniformly without replacement, to 0."""
    if count == 0:
        return series
    idx = rng(seed).choice(len(series), size=count, replace=False)
    vals = series.values.copy()
    vals[idx] = 0.0
    return series.with_values(vals)


def sparsify(series: TimeSeries, rate: float, seed: int) -> TimeSeries:
    """Zero exactly ``floor(rate*T)`` distinct, uniformly chosen positions."""
    if not 0 <= rate < 1:
        raise ValueError(f"rate must lie in [0, 1), got {rate}")
    return zero_positions(series, int(math.floor(rate * len(series))), seed)


def standardize(values: np.ndarray) -> np.ndarray:
    sd = values.std()
    centered = values - values.mean()
    return centered / sd if sd > 0 else centered


@dataclass(frozen=True)
class SignalSpec:
    """Declarative description of one synthetic series.

    ``params`` keys by kind:
      sine: frequency, amplitude, phase
      multisine / noisy_multisine: components [[f, a, phase], ...], noise_sigma
      lorenz: any LorenzParams field
      white_noise: sigma
    """

    kind: str
    length: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; expected one of {SIGNAL_KINDS}")
        if self.length < 1:
            raise ValueError("length must be >= 1")

    def with_seed(self, seed: int) -> "SignalSpec":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "length": self.length, "seed": self.seed,
                "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "SignalSpec":
        return cls(kind=d["kind"], length=int(d["length"]), seed=int(d.get("seed", 0)),
                   params=dict(d.get("params", {})))


# default noise level for the noisy multisine (relative to unit-amplitude tones)
DEFAULT_NOISE_SIGMA = 0.12
# observation interval 0.25 model time units; at dt=0.01 a 200-sample window
# covers only two time units and looks like a smooth low-frequency wave
DEFAULT_BENCHMARK_LORENZ = LorenzParams(sample_every=25)


def generate(spec: SignalSpec, randomize: bool = False) -> TimeSeries:
    """Realize a :class:`SignalSpec`.

    With ``randomize`` the seed also draws the "initial conditions" of the
    deterministic signals: tone phases uniform on [0, 2*pi) and a Lorenz
    initial state offset uniform in [-0.5, 0.5]^3. Noise draws use a stream
    independent of those.
    """
    p = spec.params
    T = spec.length
    draws = rng(spec.seed)
    init_stream, noise_seed = draws.random(8), int(draws.integers(0, 2**63))
    if spec.kind == "sine":
        phase = 2 * np.pi * init_stream[0] if randomize else p.get("phase", DEFAULT_SINE[2])
        s = gen_sine(T, p.get("frequency", DEFAULT_SINE[0]), p.get("amplitude", DEFAULT_SINE[1]), phase)
    elif spec.kind in ("multisine", "noisy_multisine"):
        comps = [tuple(c) for c in p.get("components", DEFAULT_MULTISINE)]
        if randomize:
            comps = [(f, a, 2 * np.pi * init_stream[i % 8]) for i, (f, a, _) in enumerate(comps)]
        s = gen_multisine(T, comps)
        if spec.kind == "noisy_multisine":
            s = add_gaussian_noise(s, p.get("noise_sigma", DEFAULT_NOISE_SIGMA), noise_seed)
    elif spec.kind == "lorenz":
        fields = {k: v for k, v in p.items() if k in LorenzParams.__dataclass_fields__}
        lp = LorenzParams(**fields)
        if randomize:
            lp = replace(lp, initial_state=tuple(np.asarray(lp.initial_state) + init_stream[:3] - 0.5))
        s = gen_lorenz(T, lp)
    else:
        s = gen_white_noise(T, p.get("sigma", 1.0), noise_seed)
    return s.with_values(s.values, id=spec.kind)


@dataclass(frozen=True)
class Benchmark:
    series: TimeSeries
    boundaries: tuple
    segment_length: int
    labels: tuple = SIGNAL_KINDS

    def segment(self, k: int) -> np.ndarray:
        L = self.segment_length
        return self.series.values[k * L:(k + 1) * L]


def five_segment_benchmark(segment_length: int = 500, seed: int = 0,
                           noise_sigma: float = DEFAULT_NOISE_SIGMA,
                           lorenz: LorenzParams = DEFAULT_BENCHMARK_LORENZ) -> Benchmark:
    """Concatenate standardized sine, multisine, noisy multisine, Lorenz and
    white-noise segments of equal length.

    The seed sets the tone phases, the noise draws and the Lorenz starting
    offset, so every seed is a different realization of the same five regimes.
    """
    L = segment_length
    # 5 * seed + k keeps segment streams disjoint across benchmark seeds
    if L < 1:
        raise DegenerateInputError("segment_length must be >= 1")
    specs = [
        SignalSpec("sine", L, 5 * seed),
        SignalSpec("multisine", L, 5 * seed + 1),
        SignalSpec("noisy_multisine", L, 5 * seed + 2, {"noise_sigma": noise_sigma}),
        SignalSpec("lorenz", L, 5 * seed + 3, {f: getattr(lorenz, f) for f in LorenzParams.__dataclass_fields__}),
        SignalSpec("white_noise", L, 5 * seed + 4),
    ]
    parts = [standardize(generate(s, randomize=True).values) for s in specs]
    series = TimeSeries(np.concatenate(parts), id="five_segment_benchmark")
    return Benchmark(series, tuple(L * k for k in range(1, 5)), L)
