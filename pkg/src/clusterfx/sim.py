"""Monte Carlo harness for size and power of the ANOVA-type tests.

Clustered pre-post data are generated with compound-symmetric blocks within
each period and a constant cross-period correlation.  Every replication draws
from its own random stream derived from ``(seed, replication index)``, so a
report depends only on the configuration, never on how replications are
spread over worker processes.
"""
import dataclasses
import enum
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covariance import estimate_covariance
from .data import ClusterRecord, StudyData
from .effects import estimate_p
from .errors import BadConfig, DegenerateVariance, NotPSD
from .inference import STANDARD_CONTRASTS, anova_type_test, build_contrast

SIZE_PROB = 0.3
EIG_FLOOR_RTOL = 1e-12


class Family(enum.Enum):
    DISCRETIZED_NORMAL = "DiscretizedNormal"
    LOG_NORMAL = "LogNormal"
    CAUCHY = "Cauchy"


class Alternative(enum.Enum):
    NULL = "Null"
    ONE_POINT = "OnePoint"
    ONE_TIME = "OneTime"
    INCREASING_TREND = "IncreasingTrend"


def gen_cluster_sizes(M, rng, size=None):
    """``Binomial(M - 1, 0.3) + 1``: cluster sizes in ``1..M``."""
    return rng.binomial(M - 1, SIZE_PROB, size=size) + 1


def block_cov(m1, m2, rho, sigma2, check=True):
    """Covariance (or scale) matrix of one cluster's stacked pre and post values.

    Each period block is compound symmetric with variance ``sigma2[l]`` and
    within-period correlation ``rho[l]``; every pre/post pair has correlation
    ``rho[2]``.
    """
    r1, r2, r12 = rho
    s1, s2 = math.sqrt(sigma2[0]), math.sqrt(sigma2[1])
    n = m1 + m2
    out = np.empty((n, n))
    out[:m1, :m1] = sigma2[0] * (r1 * np.ones((m1, m1)) + (1 - r1) * np.eye(m1))
    out[m1:, m1:] = sigma2[1] * (r2 * np.ones((m2, m2)) + (1 - r2) * np.eye(m2))
    out[:m1, m1:] = r12 * s1 * s2
    out[m1:, :m1] = r12 * s1 * s2
    if check and n:
        evals = np.linalg.eigvalsh(out)
        if evals[0] < -EIG_FLOOR_RTOL * max(evals[-1], 1.0):
            raise NotPSD(f"block covariance for sizes ({m1},{m2}) has eigenvalue {evals[0]:.3g}")
    return out


def psd_factor(cov):
    """``L`` with ``L L' = cov`` from a symmetric eigendecomposition, negatives floored."""
    evals, evecs = np.linalg.eigh(cov)
    evals = np.where(evals < EIG_FLOOR_RTOL * max(evals[-1], 0.0), 0.0, evals)
    return evecs * np.sqrt(evals)


def gen_cluster(family, mean_pre, mean_post, cov, rng, factor=None):
    """Draw one cluster; the lengths of ``mean_pre``/``mean_post`` fix the period sizes."""
    family = Family(family)
    mu1 = np.atleast_1d(np.asarray(mean_pre, dtype=float))
    mu2 = np.atleast_1d(np.asarray(mean_post, dtype=float))
    m1 = mu1.size
    L = psd_factor(cov) if factor is None else factor
    z = L @ rng.standard_normal(L.shape[1])
    mu = np.concatenate((mu1, mu2))
    if family is Family.DISCRETIZED_NORMAL:
        x = np.rint(mu + z)
    elif family is Family.LOG_NORMAL:
        x = np.exp(z) + mu
    else:
        x = z / abs(rng.standard_normal()) + mu
    return x[:m1], x[m1:]


def apply_alternative(kind, delta, T=3):
    """``(T, 2)`` grid of location shifts for each design cell."""
    kind = Alternative(kind)
    mu = np.zeros((T, 2))
    if kind is Alternative.ONE_POINT:
        mu[T - 1, 1] = delta
    elif kind is Alternative.ONE_TIME:
        mu[:, 1] = delta
    elif kind is Alternative.INCREASING_TREND:
        mu[:] = (delta * np.arange(1, 2 * T + 1) / (2 * T)).reshape(T, 2)
    return mu


@dataclass(frozen=True)
class SimulationConfig:
    family: Family = Family.DISCRETIZED_NORMAL
    T: int = 3
    n_c: int = 5
    n_1: int = 10
    n_2: int = 5
    M: int = 3
    rho: tuple = (0.9, 0.9, 0.1)
    sigma2: tuple = (1.0, 1.0)
    alternative: Alternative = Alternative.NULL
    delta: float = 0.0
    runs: int = 1000
    alpha: float = 0.05
    seed: int = 0
    repair_psd: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError:
            raise BadConfig("family", f"unknown family {self.family!r}") from None
        try:
            object.__setattr__(self, "alternative", Alternative(self.alternative))
        except ValueError:
            raise BadConfig("alternative", f"unknown alternative {self.alternative!r}") from None
        object.__setattr__(self, "rho", tuple(float(x) for x in self.rho))
        object.__setattr__(self, "sigma2", tuple(float(x) for x in self.sigma2))
        if len(self.rho) != 3:
            raise BadConfig("rho", "needs three values (rho1, rho2, rho12)")
        if len(self.sigma2) != 2 or min(self.sigma2) <= 0:
            raise BadConfig("sigma2", "needs two positive variances")
        if self.T < 2:
            raise BadConfig("T", "needs at least two groups")
        if self.M < 1:
            raise BadConfig("M", "maximum cluster size must be >= 1")
        for name in ("n_c", "n_1", "n_2"):
            if getattr(self, name) < 0:
                raise BadConfig(name, "must be >= 0")
        if self.n_c + self.n_1 == 0 or self.n_c + self.n_2 == 0:
            raise BadConfig("n_c", "every design cell needs at least one cluster")
        if self.runs < 1:
            raise BadConfig("runs", f"must be >= 1, got {self.runs}")
        if not 0 < self.alpha < 1:
            raise BadConfig("alpha", f"must lie in (0, 1), got {self.alpha}")
        if self.delta < 0:
            raise BadConfig("delta", "shift must be >= 0")
        if not self.repair_psd and self.non_psd_sizes():
            m1, m2 = self.non_psd_sizes()[0]
            raise BadConfig(
                "rho",
                f"block covariance for sizes ({m1},{m2}) is not positive semidefinite; "
                "set repair_psd = true to clip negative eigenvalues",
            )

    def non_psd_sizes(self):
        """Cluster-size pairs whose block matrix is not positive semidefinite."""
        bad = []
        for m1, m2 in itertools.product(range(1, self.M + 1), repeat=2):
            try:
                block_cov(m1, m2, self.rho, self.sigma2)
            except NotPSD:
                bad.append((m1, m2))
        return bad

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["family"] = self.family.value
        d["alternative"] = self.alternative.value
        d["rho"] = list(self.rho)
        d["sigma2"] = list(self.sigma2)
        return d

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


class _Generator:
    """Per-configuration cache of covariance factors."""

    def __init__(self, config):
        self.config = config
        self.mu = apply_alternative(config.alternative, config.delta, config.T)
        self._factors = {}

    def factor(self, m1, m2):
        key = (m1, m2)
        if key not in self._factors:
            cfg = self.config
            self._factors[key] = psd_factor(block_cov(m1, m2, cfg.rho, cfg.sigma2, check=False))
        return self._factors[key]

    def cluster(self, j, rng):
        cfg = self.config
        m1, m2 = (int(x) for x in gen_cluster_sizes(cfg.M, rng, size=2))
        return gen_cluster(
            cfg.family,
            np.full(m1, self.mu[j, 0]),
            np.full(m2, self.mu[j, 1]),
            None,
            rng,
            factor=self.factor(m1, m2),
        )

    def study(self, rng):
        cfg = self.config
        clusters = []
        for j in range(cfg.T):
            g = j + 1
            for k in range(cfg.n_c):
                pre, post = self.cluster(j, rng)
                clusters.append(ClusterRecord(g, f"c{k}", pre, post))
            # incomplete clusters: full draw, unobserved period discarded
            for k in range(cfg.n_1):
                pre, _ = self.cluster(j, rng)
                clusters.append(ClusterRecord(g, f"i1_{k}", pre, ()))
            for k in range(cfg.n_2):
                _, post = self.cluster(j, rng)
                clusters.append(ClusterRecord(g, f"i2_{k}", (), post))
        return StudyData(cfg.T, tuple(clusters))


def replication_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def simulate_study(config, index):
    """The dataset of replication ``index``."""
    return _Generator(config).study(replication_rng(config.seed, index))


def _run_chunk(config, indices):
    gen = _Generator(config)
    specs = [build_contrast(kind, config.T) for kind in STANDARD_CONTRASTS]
    rejections = np.zeros(len(specs), dtype=np.int64)
    degenerate = np.zeros(len(specs), dtype=np.int64)
    notes = set()
    for i in indices:
        data = gen.study(replication_rng(config.seed, i))
        est = estimate_p(data)
        cov = estimate_covariance(data, est.W_hat.W)
        notes.update(cov.warnings)
        for e, spec in enumerate(specs):
            try:
                test = anova_type_test(est, cov.V, spec)
            except DegenerateVariance:
                degenerate[e] += 1
                continue
            rejections[e] += test.reject_at(config.alpha)
    return rejections, degenerate, notes


@dataclass(frozen=True)
class EffectRate:
    effect: str
    rate: float
    mc_se: float
    runs: int
    degenerate: int = 0


@dataclass(frozen=True)
class SimulationReport:
    """Rejection rates (percent) for the intervention, time and interaction tests."""

    config: SimulationConfig
    results: tuple
    warnings: tuple = ()

    def rate(self, effect):
        for r in self.results:
            if r.effect == effect:
                return r.rate
        raise KeyError(effect)

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "results": [dataclasses.asdict(r) for r in self.results],
            "warnings": list(self.warnings),
        }

    def write(self, out_dir, stem="report"):
        """Write ``<stem>.csv`` (effect,rate,mc_se,runs) and ``<stem>.json``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{stem}.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("effect,rate,mc_se,runs\n")
            for r in self.results:
                fh.write(f"{r.effect},{r.rate!r},{r.mc_se!r},{r.runs}\n")
        json_path = out_dir / f"{stem}.json"
        json_path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        return csv_path, json_path


def _chunks(n, k):
    k = max(1, min(k, n))
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(k)]


def run_experiment(config, workers=1):
    """Run ``config.runs`` replications and tally rejections at ``config.alpha``.

    Replications whose estimated variance vanishes in a hypothesis space
    count as non-rejections and are reported in ``degenerate``.
    """
    chunks = _chunks(config.runs, workers)
    if workers <= 1 or len(chunks) == 1:
        parts = [_run_chunk(config, chunks[0] if len(chunks) == 1 else range(config.runs))]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), chunks))
    rejections = sum(p[0] for p in parts)
    degenerate = sum(p[1] for p in parts)
    notes = set().union(*(p[2] for p in parts))
    if config.repair_psd and config.non_psd_sizes():
        notes.add(
            f"rho={config.rho} gives a non-PSD block matrix for some cluster sizes; "
            "negative eigenvalues were clipped to zero"
        )
    notes = sorted(notes)
    results = []
    for kind, rej, deg in zip(STANDARD_CONTRASTS, rejections, degenerate):
        frac = rej / config.runs
        results.append(
            EffectRate(
                kind.value,
                float(100.0 * frac),
                float(100.0 * math.sqrt(frac * (1.0 - frac) / config.runs)),
                config.runs,
                int(deg),
            )
        )
    return SimulationReport(config, tuple(results), tuple(notes))


# Simulation grids -----------------------------------------------------------

SAMPLE_SIZES = ((5, 10, 5), (10, 5, 5))
CORRELATIONS = ((0.9, 0.9, 0.1), (0.1, 0.1, 0.9), (0.1, 0.9, 0.9))
VARIANCES = ((1.0, 1.0), (1.0, 5.0))
MAX_SIZES = (3, 6)
POWER_DELTAS = tuple(round(0.3 * i, 1) for i in range(11))


def size_study_grid(base):
    """All null configurations of the size study, in table order."""
    out = []
    for family in Family:
        for (n_c, n_1, n_2), rho, sigma2, M in itertools.product(SAMPLE_SIZES, CORRELATIONS, VARIANCES, MAX_SIZES):
            out.append(
                base.replace(
                    family=family, n_c=n_c, n_1=n_1, n_2=n_2, rho=rho, sigma2=sigma2, M=M,
                    alternative=Alternative.NULL, delta=0.0, repair_psd=True,
                )
            )
    return out


def power_grid(base, alternative, family=Family.DISCRETIZED_NORMAL, correlations=CORRELATIONS):
    """Balanced ``(5, 5, 5)`` power study over correlations, ``M`` and shift."""
    out = []
    for rho, M, delta in itertools.product(correlations, MAX_SIZES, POWER_DELTAS):
        out.append(
            base.replace(
                family=family, n_c=5, n_1=5, n_2=5, rho=rho, sigma2=(1.0, 1.0), M=M,
                alternative=alternative, delta=delta, repair_psd=True,
            )
        )
    return out


PRESETS = {
    "table3": size_study_grid,
    "onepoint": lambda base: power_grid(base, Alternative.ONE_POINT),
    "onetime": lambda base: power_grid(base, Alternative.ONE_TIME),
    "trend": lambda base: power_grid(base, Alternative.INCREASING_TREND),
}


# Config files ---------------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(SimulationConfig)}


def _coerce(key, raw):
    try:
        if key in ("rho", "sigma2"):
            if isinstance(raw, str):
                raw = raw.strip().strip("()[]").split(",")
            return tuple(float(x) for x in raw)
        if key in ("T", "n_c", "n_1", "n_2", "M", "runs", "seed"):
            value = float(raw) if isinstance(raw, str) else raw
            if value != int(value):
                raise ValueError(f"not an integer: {raw}")
            return int(value)
        if key in ("delta", "alpha"):
            return float(raw)
        if key == "repair_psd":
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"not a boolean: {raw}")
            return text in ("true", "1", "yes")
        return str(raw).strip().strip('"').strip("'")
    except (TypeError, ValueError) as exc:
        raise BadConfig(key, str(exc)) from None


def parse_config(text, base=None):
    """Parse ``key = value`` lines or a JSON object into a :class:`SimulationConfig`.

    Keys must be field names of :class:`SimulationConfig`.  Tuples are written
    comma-separated (``rho = 0.9, 0.9, 0.1``).  Section headers such as
    ``[simulation]`` and ``#`` comments are ignored.  In JSON form the fields
    may be nested under a ``"simulation"`` object.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise BadConfig("<file>", f"invalid JSON: {exc}") from None
        items = obj.get("simulation", obj).items()
    else:
        items = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line or (line.startswith("[") and line.endswith("]")):
                continue
            if "=" not in line:
                raise BadConfig(f"line {lineno}", f"expected key = value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            items.append((key, value))
    values = {}
    for key, raw in items:
        if key not in _FIELDS:
            raise BadConfig(key, "unknown configuration key")
        values[key] = _coerce(key, raw)
    if base is not None:
        return base.replace(**values)
    return SimulationConfig(**values)


def load_config(path, base=None):
    return parse_config(Path(path).read_text(encoding="utf-8"), base)
