"""Signal generators, the additive noise model, error metrics and a Monte Carlo harness."""

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_int, check_sigma, check_tau, check_vector
from .spectral import cs_index_set, dft, idft, sign_of_real_spectrum

logger = logging.getLogger(__name__)

SIGN = "sign"
GLOBAL_PHASE = "global_phase"
GLOBAL_PHASE_REFLECTION = "global_phase_reflection"

TASKS = ("sign", "vpr3", "separated")


@dataclass(frozen=True)
class NoiseConfig:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        check_sigma(self.sigma)


@dataclass
class TrialReport:
    seed: int
    n: int
    tau: int
    sigma: float
    mse: float
    sign_errors: int
    residual: float
    tau_hat: int = None

    def to_dict(self):
        return asdict(self)


def _rng(seed):
    return np.random.default_rng(seed)


def complex_normal(rng, size):
    """Circular complex Gaussian samples with unit variance (each part has variance 1/2)."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def gen_real_spectrum_signal(n, tau, seed=0):
    """Random signal on the centred support whose spectrum is real, scaled to ``||F|| = 1``.

    Returns
    -------
    f : numpy.ndarray (complex)
        Conjugate-symmetric signal, zero outside ``cs_index_set(n, tau)``.
    F : numpy.ndarray (float)
        Its real spectrum ``idft(f)``.
    """
    n = check_int(n, "n")
    tau = check_tau(tau, n)
    rng = _rng(seed)
    f = np.zeros(n, dtype=complex)
    f[0] = rng.standard_normal()
    half = tau // 2
    if half:
        vals = rng.standard_normal(half) + 1j * rng.standard_normal(half)
        k = np.arange(1, half + 1)
        f[k] = vals
        f[(-k) % n] = np.conj(vals)
    F = idft(f)
    scale = np.linalg.norm(F)
    f = f / scale
    return f, np.real(F) / scale


def gen_complex_signal(n, tau, seed=0, offset=None):
    """Complex Gaussian signal on the window ``offset .. offset+tau`` (centred by default)."""
    n = check_int(n, "n")
    rng = _rng(seed)
    if offset is None:
        idx = cs_index_set(n, check_tau(tau, n))
    else:
        idx = (offset + np.arange(tau + 1)) % n
    f = np.zeros(n, dtype=complex)
    f[idx] = complex_normal(rng, idx.size)
    return f


@dataclass(frozen=True)
class Layout:
    """Two objects of lengths ``len1`` and ``len2`` separated by ``gap`` zeros, starting at ``offset``."""

    len1: int
    gap: int
    len2: int
    offset: int = 0

    @property
    def total(self):
        return self.len1 + self.gap + self.len2

    @classmethod
    def centered(cls, n, len1, gap, len2):
        total = len1 + gap + len2
        return cls(len1, gap, len2, (-((total - 1) // 2)) % n)

    def reflection_center(self, n):
        """``c`` such that ``k -> c - k`` (mod n) maps the layout onto itself."""
        return (2 * self.offset + self.total - 1) % n

    def to_dict(self):
        return asdict(self)


def validate_layout(layout, n):
    if min(layout.len1, layout.gap, layout.len2) < 0:
        raise ValueError("layout lengths must be nonnegative")
    if layout.len1 < 1:
        raise ValueError("first object must be nonempty")
    if layout.total > n:
        raise ValueError(f"layout of total length {layout.total} does not fit in n={n}")
    if layout.gap <= max(layout.len1, layout.len2):
        raise ValueError("objects must be separated by more than the larger object length")


def gen_separated_pair(n, len1, gap, len2, seed=0):
    """Two complex Gaussian blocks separated by ``gap`` zeros, centred on index 0.

    Returns ``(f, f1, f2, layout)`` with ``f = f1 + f2``.
    """
    layout = Layout.centered(n, len1, gap, len2)
    validate_layout(layout, n)
    rng = _rng(seed)
    f1 = np.zeros(n, dtype=complex)
    f2 = np.zeros(n, dtype=complex)
    i1 = (layout.offset + np.arange(len1)) % n
    i2 = (layout.offset + len1 + gap + np.arange(len2)) % n
    f1[i1] = complex_normal(rng, len1)
    f2[i2] = complex_normal(rng, len2)
    return f1 + f2, f1, f2, layout


def apply_noise(F, cfg):
    """Measured intensities ``|F + (sigma/sqrt(N)) eta|**2`` with unit complex Gaussian ``eta``."""
    F = check_vector(F, "F", dtype=complex)
    if cfg.sigma == 0:
        return np.abs(F) ** 2
    n = F.shape[0]
    eta = complex_normal(_rng(cfg.seed), n)
    return np.abs(F + cfg.sigma / np.sqrt(n) * eta) ** 2


def _reflect(f, center=0):
    """``conj(f(center - k mod N))``: the conjugate-reflection trivial ambiguity."""
    return np.conj(np.roll(f[::-1], 1 + center))


def mse(fhat, f, ambiguity=SIGN, center=0):
    """Squared error minimised over a trivial ambiguity.

    ``sign``: ``min(sum|fhat - f|^2, sum|fhat + f|^2)``.
    ``global_phase``: ``min_theta sum|exp(i theta) fhat - f|^2``.
    ``global_phase_reflection``: as ``global_phase``, also trying
    ``conj(fhat(center - k))``.  Every such reflection leaves ``|F|`` unchanged;
    `center` picks the one that maps the known support onto itself.
    """
    fhat = np.asarray(fhat, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if fhat.shape != f.shape:
        raise ValueError(f"length mismatch: {fhat.shape} vs {f.shape}")
    if ambiguity == SIGN:
        return float(min(np.sum(np.abs(fhat - f) ** 2), np.sum(np.abs(fhat + f) ** 2)))
    if ambiguity == GLOBAL_PHASE:
        # align explicitly; the expanded closed form cancels badly near zero error
        c = np.vdot(fhat, f)
        phase = c / abs(c) if c != 0 else 1.0
        return float(np.sum(np.abs(phase * fhat - f) ** 2))
    if ambiguity == GLOBAL_PHASE_REFLECTION:
        return min(mse(fhat, f, GLOBAL_PHASE), mse(_reflect(fhat, center), f, GLOBAL_PHASE))
    raise ValueError(f"unknown ambiguity {ambiguity!r}")


def joint_mse(fhats, fs, reflection=True):
    """Error of several signals sharing one global phase (and optionally one reflection)."""
    fhat = np.concatenate([np.asarray(x, dtype=complex) for x in fhats])
    f = np.concatenate([np.asarray(x, dtype=complex) for x in fs])
    best = mse(fhat, f, GLOBAL_PHASE)
    if reflection:
        refl = np.concatenate([_reflect(np.asarray(x, dtype=complex)) for x in fhats])
        best = min(best, mse(refl, f, GLOBAL_PHASE))
    return best


def sign_errors(shat, s):
    """Number of mismatched entries after the best global sign flip."""
    shat = np.asarray(shat)
    s = np.asarray(s)
    wrong = int(np.count_nonzero(shat != s))
    return min(wrong, s.shape[0] - wrong)


def trial_seed(master_seed, sigma_index, trial):
    """Per-trial seed derived from the master seed, independent of execution order."""
    ss = np.random.SeedSequence([int(master_seed), int(sigma_index), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class MonteCarloConfig:
    n: int = 100
    tau: int = 20
    sigma_list: list = field(default_factory=lambda: [1e-4, 1e-3, 1e-2])
    trials: int = 10
    task: str = "sign"
    seed: int = 0
    len1: int = None
    gap: int = None
    len2: int = None
    scan_tau: bool = False

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if check_int(self.trials, "trials") < 1:
            raise ValueError("trials must be at least 1")
        for s in self.sigma_list:
            check_sigma(s)

    @classmethod
    def from_dict(cls, d):
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)


def _run_sign_trial(cfg, sigma, seed):
    from .solver import retrieve_sign
    from .support import estimate_support

    f, F = gen_real_spectrum_signal(cfg.n, cfg.tau, seed)
    noise_seed = int(np.random.SeedSequence(seed).generate_state(1)[0])
    intensities = apply_noise(F, NoiseConfig(sigma, noise_seed))
    tau_hat = None
    tau_used = cfg.tau
    if cfg.scan_tau:
        lo = max(0, cfg.tau - 20)
        hi = min(cfg.n - 2 - (cfg.n % 2), cfg.tau + 20)
        tau_hat, _ = estimate_support(intensities, lo, hi - hi % 2, sigma)
        tau_used = tau_hat
    shat, diag = retrieve_sign(intensities, tau_used, sigma)
    fhat = dft(np.sqrt(np.clip(intensities, 0, None)) * shat)
    return TrialReport(
        seed=seed, n=cfg.n, tau=cfg.tau, sigma=sigma,
        mse=mse(fhat, f, SIGN),
        sign_errors=sign_errors(shat, sign_of_real_spectrum(F)),
        residual=diag.residual, tau_hat=tau_hat,
    )


def _run_vpr3_trial(cfg, sigma, seed):
    from .applications import vpr3_recover

    rng = np.random.default_rng(seed)
    s1, s2, s3 = (int(x) for x in rng.integers(0, 2**62, size=3))
    f1 = gen_complex_signal(cfg.n, cfg.tau, s1)
    f2 = gen_complex_signal(cfg.n, cfg.tau, s2)
    F1, F2 = idft(f1), idft(f2)
    noise = np.random.SeedSequence(s3).generate_state(3)
    i1 = apply_noise(F1, NoiseConfig(sigma, int(noise[0])))
    i2 = apply_noise(F2, NoiseConfig(sigma, int(noise[1])))
    ssum = apply_noise(F1 + F2, NoiseConfig(sigma, int(noise[2])))
    result = vpr3_recover(i1, i2, ssum, cfg.tau, "auto", sigma=sigma)
    true_sign = sign_of_real_spectrum(np.imag(F1 * np.conj(F2)))
    return TrialReport(
        seed=seed, n=cfg.n, tau=cfg.tau, sigma=sigma,
        mse=joint_mse([result.f1, result.f2], [f1, f2]),
        sign_errors=sign_errors(result.signs, true_sign),
        residual=result.residual, tau_hat=result.tau_interference,
    )


def _run_separated_trial(cfg, sigma, seed):
    from .applications import separated_objects_recover

    len1 = cfg.len1 if cfg.len1 is not None else max(1, cfg.tau // 3)
    len2 = cfg.len2 if cfg.len2 is not None else len1
    gap = cfg.gap if cfg.gap is not None else max(len1, len2) + 1
    f, f1, f2, layout = gen_separated_pair(cfg.n, len1, gap, len2, seed)
    noise_seed = int(np.random.SeedSequence(seed).generate_state(1)[0])
    intensity = apply_noise(idft(f), NoiseConfig(sigma, noise_seed))
    result = separated_objects_recover(intensity, layout, sigma=sigma)
    true_sign = sign_of_real_spectrum(np.abs(idft(f1)) ** 2 - np.abs(idft(f2)) ** 2)
    return TrialReport(
        seed=seed, n=cfg.n, tau=layout.total - 1, sigma=sigma,
        mse=mse(result.f, f, GLOBAL_PHASE_REFLECTION, layout.reflection_center(cfg.n)),
        sign_errors=sign_errors(result.signs, true_sign),
        residual=result.residual, tau_hat=result.tau_difference,
    )


_RUNNERS = {"sign": _run_sign_trial, "vpr3": _run_vpr3_trial, "separated": _run_separated_trial}


def monte_carlo(config, threads=1):
    """Run every (sigma, trial) pair of `config` and return the per-trial reports.

    Results are identical for any ``threads`` value since every trial is
    seeded from ``(config.seed, sigma index, trial index)`` alone.
    """
    if isinstance(config, dict):
        config = MonteCarloConfig.from_dict(config)
    runner = _RUNNERS[config.task]
    jobs = [
        (sigma, trial_seed(config.seed, i, t))
        for i, sigma in enumerate(config.sigma_list)
        for t in range(config.trials)
    ]
    logger.info("monte carlo: task=%s, %d jobs", config.task, len(jobs))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: runner(config, *job), jobs))
    return [runner(config, *job) for job in jobs]


def aggregate(reports):
    """Per-sigma summary rows: sigma, mean_mse, median_mse, mean_sign_errors, trials."""
    rows = []
    for sigma in sorted({r.sigma for r in reports}):
        group = [r for r in reports if r.sigma == sigma]
        errs = np.array([r.mse for r in group])
        rows.append({
            "sigma": sigma,
            "mean_mse": float(np.mean(errs)),
            "median_mse": float(np.median(errs)),
            "mean_sign_errors": float(np.mean([r.sign_errors for r in group])),
            "trials": len(group),
        })
    return rows


def aggregate_csv(reports):
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, ["sigma", "mean_mse", "median_mse", "mean_sign_errors", "trials"], lineterminator="\n"
    )
    writer.writeheader()
    for row in aggregate(reports):
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def reports_jsonl(reports):
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)
