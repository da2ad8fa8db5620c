"""Config-driven experiment runs: checkpoints, cross-checks, samples, spectra."""
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import SingularGram
from .functionals import apply
from .gram import representing_sequence
from .oracle import discretize, oracle_condition, sample, stacked_weights
from .posterior import (condition, fiber_check, posterior_cov, posterior_mean,
                        posterior_var, posterior_via_representing)
from .rkhs_diag import mercer_spectrum, power_rkhs_check
from .sequential import (PosteriorState, assimilate, expanded_two_stage_moments,
                         seq_cov, seq_mean, seq_var)

VAR_SLACK = 1e-10
ORACLE_TOL = 1e-5
ORACLE_TOL_DERIV = 5e-5


def write_csv(path, header, columns):
    """UTF-8 CSV with shortest round-trip float formatting."""
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class Checkpoint:
    label: str
    p: int
    csv: str
    mean: list
    sd: list
    fiber_residuals: list
    max_fiber: float
    batch_vs_sequential: float
    jitter: float


@dataclass
class RunReport:
    config: str
    status: str = "PASSED"
    checkpoints: list = field(default_factory=list)
    timing: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2)


def _sd(var):
    return np.sqrt(np.clip(var, 0.0, None))


def state_fiber(state):
    mf = state.mean_function()
    return np.array([apply(f, mf) for f in state.functionals]) - state.values


def run(cfg, out_dir):
    """Assimilate the configured batches in order, writing one CSV per checkpoint.

    Raises :class:`SingularGram` (after writing ``report.json``) when a batch
    cannot be factorized.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = cfg.output_grid()
    k, m = cfg.kernel, cfg.mean
    prior_sd = _sd(k.diag(grid))
    report = RunReport(config=cfg.source, metadata={
        "quad_order": cfg.quad_order, "tolerance": cfg.tolerance,
        "kernel": {"family": k.family, "lengthscale": k.lengthscale, "variance": k.variance},
        "domain": list(cfg.domain), "output_n": cfg.output_n,
    })
    state = PosteriorState.prior(k, m)
    prev_var = k.diag(grid)

    if not cfg.batches:
        name = "posterior_batch0.csv"
        write_csv(out_dir / name, ["s", "mean", "sd", "prior_sd"],
                  [grid, m(grid), prior_sd, prior_sd])
        report.checkpoints.append(asdict(Checkpoint("prior", 0, name, list(m(grid)),
                                                    list(prior_sd), [], 0.0, 0.0, 0.0)))

    for t, batch in enumerate(cfg.batches, 1):
        try:
            t0 = time.perf_counter()
            state = assimilate(state, batch.functionals, batch.values)
            t1 = time.perf_counter()
            pg = condition(k, m, state.functionals, state.values)
            t2 = time.perf_counter()
        except SingularGram as exc:
            report.status = "FAILED"
            report.failures.append(f"batch {t} ({batch.label}): {type(exc).__name__}: {exc}")
            (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
            raise
        mean, var = seq_mean(state, grid), seq_var(state, grid)
        fiber = state_fiber(state)
        disc = max(np.max(np.abs(mean - posterior_mean(pg, grid)), initial=0.0),
                   np.max(np.abs(var - posterior_var(pg, grid)), initial=0.0))
        name = f"posterior_batch{t}.csv"
        write_csv(out_dir / name, ["s", "mean", "sd", "prior_sd"], [grid, mean, _sd(var), prior_sd])
        max_fiber = float(np.max(np.abs(fiber), initial=0.0))
        report.checkpoints.append(asdict(Checkpoint(
            batch.label, state.p, name, mean.tolist(), _sd(var).tolist(), fiber.tolist(),
            max_fiber, float(disc), float(state.jitters[-1]))))
        report.timing.append({"batch": t, "batch_size": len(batch.functionals), "total_p": state.p,
                              "incremental_s": t1 - t0, "full_s": t2 - t1})
        if max_fiber > cfg.tolerance:
            report.failures.append(f"batch {t}: fiber residual {max_fiber:.3g} > {cfg.tolerance:g}")
        if disc > cfg.tolerance:
            report.failures.append(f"batch {t}: batch vs sequential {disc:.3g} > {cfg.tolerance:g}")
        if np.any(var > prev_var + VAR_SLACK):
            report.failures.append(f"batch {t}: posterior variance increased")
        prev_var = var

    if report.failures:
        report.status = "FAILED"
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    return report


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<34} measured={self.measured:.3e}  tol={self.tolerance:.1e}"


def _check(name, measured, tol):
    return CheckResult(name, bool(measured <= tol), float(measured), float(tol))


def random_splits(p, rng, max_batches=4):
    """Random cut points splitting ``range(p)`` into 2..max_batches contiguous batches."""
    nb = int(rng.integers(2, min(max_batches, p) + 1))
    cuts = np.sort(rng.choice(np.arange(1, p), size=nb - 1, replace=False))
    return np.split(np.arange(p), cuts)


def verify(cfg, n_splits=10):
    """Run every cross-check on the configured observations; list of :class:`CheckResult`."""
    k, m = cfg.kernel, cfg.mean
    fs, y = cfg.functionals, cfg.values
    rng = np.random.default_rng(cfg.seed)
    pg = condition(k, m, fs, y)
    grid101 = np.linspace(*cfg.domain, 101)
    results = []

    fib = fiber_check(pg)
    results.append(_check("fiber residual", np.max(np.abs(fib), initial=0.0), cfg.tolerance))

    gm = discretize(k, m, cfg.oracle_n, cfg.domain)
    post = oracle_condition(gm, stacked_weights(fs, gm.grid), y)
    idx = np.unique(np.linspace(0, cfg.oracle_n - 1, min(cfg.oracle_n, 401)).astype(int))
    pts = gm.grid[idx]
    tol = ORACLE_TOL_DERIV if any(f.kind == "deriv" for f in fs) else ORACLE_TOL
    results.append(_check("oracle mean (sup)", np.max(np.abs(post.mean[idx] - posterior_mean(pg, pts))), tol))
    results.append(_check("oracle variance (sup)", np.max(np.abs(post.var[idx] - posterior_var(pg, pts))), tol))

    if pg.sys.p:
        rep = representing_sequence(pg.sys)
        eff = pg.sys.effective
        ortho = np.max(np.abs(rep @ eff @ rep.T - np.eye(pg.sys.p)))
        worst = 0.0
        for _ in range(100):
            x = rng.standard_normal(pg.sys.p)
            lhs = np.sum((rep @ eff @ x) ** 2)
            worst = max(worst, abs(lhs - x @ eff @ x) / (x @ x))
    else:
        ortho = worst = 0.0
    results.append(_check("representing orthonormality", ortho, 1e-10))
    results.append(_check("representing Parseval", worst, 1e-9))

    rd_mean = np.max(np.abs(posterior_via_representing(pg, grid101) - posterior_mean(pg, grid101)))
    rd_cov = np.max(np.abs(posterior_via_representing(pg, grid101, grid101)
                           - posterior_cov(pg, grid101, grid101)))
    results.append(_check("representing vs direct", max(rd_mean, rd_cov), 1e-9))

    prior_var = k.diag(grid101)
    results.append(_check("variance reduction", np.max(posterior_var(pg, grid101) - prior_var), VAR_SLACK))
    probe = rng.uniform(*cfg.domain, size=30)
    results.append(_check("posterior PSD (-min eig)",
                          -np.min(np.linalg.eigvalsh(posterior_cov(pg, probe, probe))), 1e-8))

    p = len(fs)
    worst = 0.0
    if p >= 2:
        for _ in range(n_splits):
            q = rng.uniform(*cfg.domain, size=20)
            state = PosteriorState.prior(k, m)
            for part in random_splits(p, rng):
                state = assimilate(state, [fs[i] for i in part], y[part])
            worst = max(worst,
                        np.max(np.abs(seq_mean(state, q) - posterior_mean(pg, q))),
                        np.max(np.abs(seq_cov(state, q, q) - posterior_cov(pg, q, q))))
    results.append(_check("transitivity sweep", worst, cfg.tolerance))

    if p >= 2:
        cut = p - len(cfg.batches[-1].functionals) if len(cfg.batches) > 1 else p - 1
        cut = cut if 0 < cut < p else p - 1
        state = assimilate(assimilate(PosteriorState.prior(k, m), fs[:cut], y[:cut]), fs[cut:], y[cut:])
        exp_mean = expanded_two_stage_moments(k, m, fs[:cut], y[:cut], fs[cut:], y[cut:], grid101)
        exp_cov = expanded_two_stage_moments(k, m, fs[:cut], y[:cut], fs[cut:], y[cut:], grid101, grid101)
        appc = max(np.max(np.abs(exp_mean - seq_mean(state, grid101))),
                   np.max(np.abs(exp_cov - seq_cov(state, grid101, grid101))))
    else:
        appc = 0.0
    results.append(_check("expanded two-stage formulae", appc, cfg.tolerance))
    return results


def sample_prior(cfg, count, seed, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gm = discretize(cfg.kernel, cfg.mean, cfg.output_n, cfg.domain)
    draws = sample(gm, count, seed)
    path = out_dir / "prior_samples.csv"
    write_csv(path, ["s"] + [f"sample_{i}" for i in range(count)], [gm.grid, *draws])
    return path


def spectrum(cfg, theta, out_dir, n=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mercer = mercer_spectrum(cfg.kernel, n or cfg.spectrum_n, cfg.domain)
    check = power_rkhs_check(mercer, theta)
    idx = np.arange(1, mercer.eigenvalues.size + 1)
    write_csv(out_dir / "spectrum.csv", ["index", "eigenvalue", "term", "partial_sum"],
              [idx, mercer.eigenvalues, check.terms, check.partial_sums])
    meta = {"measure": mercer.measure, "domain": list(mercer.domain), "grid_size": mercer.grid_size,
            "theta": theta, "tail_ratio": check.tail_ratio, "verdict": check.verdict}
    (out_dir / "spectrum.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return mercer, check
