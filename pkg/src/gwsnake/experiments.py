"""Named ensembles, each returning its results together with pass/fail verdicts."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import gof
from .experiment_harness import EnsembleResult, ExperimentSpec, Verdict, run_ensemble
from .offspring_laws import normalization_for, parse_law
from .spatial_snake import parse_displacement

__all__ = ["EXPERIMENTS", "run_named"]


def _spec(name, seed, out_dir, sub, **kw) -> ExperimentSpec:
    od = str(Path(out_dir) / sub) if out_dir else None
    return ExperimentSpec(name=name, seed=seed, out_dir=od, **kw)


def _prov(op, **params):
    return {"module": "snake_stats", "operation": op, "params": params}


def _finish(res: EnsembleResult, verdicts: List[Verdict]) -> EnsembleResult:
    res.verdicts.extend(verdicts)
    if res.spec.out_dir:
        res.write(res.spec.out_dir)
    return res


def thm1_boundary(seed, replicas=200, n_grid=(1000, 100_000), out_dir=None, workers=1):
    """Scaled largest step of Hsp: vanishes for P(Y > y) = (1+y)^-10 / 2, stays
    of order one for the calibrated p = 2 Pareto law."""
    out = {}
    for tag, disp, check in (
        ("pareto10", "pareto:10", lambda r: r > 2.0),
        ("regime-p2", "regime:p=2", lambda r: 1 / 1.5 <= r <= 1.5),
    ):
        spec = _spec("thm1-boundary", seed, out_dir, tag, offspring="geometric:0.5", displacement=disp,
                     n_grid=list(n_grid), replicas=replicas, stats=["max_step"], params={"p": 2})
        res = run_ensemble(spec, workers=workers)
        lo, hi = (float(np.median(res.values(n, "max_step"))) for n in (n_grid[0], n_grid[-1]))
        ratio = lo / hi
        crit = "median ratio > 2" if tag == "pareto10" else "median ratio within x1.5"
        out[tag] = _finish(res, [Verdict(f"{tag}-max-step-ratio", bool(check(ratio)), ratio, crit,
                                         provenance=_prov("max_step", displacement=disp))])
    return out


def thm2_noncentred(seed, replicas=200, n_grid=(1000, 100_000), out_dir=None, workers=1):
    """(B_n/n) sup |Hsp - m H| shrinks for a law with mean m = 1."""
    spec = _spec("thm2-noncentred", seed, out_dir, "shifted", offspring="geometric:0.5",
                 displacement="shifted:1:uniform3", n_grid=list(n_grid), replicas=replicas,
                 stats=["noncentred_gap", "height"])
    res = run_ensemble(spec, workers=workers)
    lo, hi = (float(np.median(res.values(n, "noncentred_gap"))) for n in (n_grid[0], n_grid[-1]))
    return {"shifted": _finish(res, [Verdict("noncentred-gap-shrinks", hi < lo, hi / lo, "median decreases",
                                             provenance=_prov("noncentred_gap"))])}


def exact_peak_mean(offspring: str, displacement: str, n: int, eta: float, p: float) -> float:
    """n P(|Y| > eta t_n) for the displacement law calibrated at n."""
    law = parse_law(offspring)
    B = normalization_for(law)(n)
    disp = parse_displacement(displacement).calibrate(n, B, law.alpha)
    t = (n / B) ** (1 / p)
    return n * disp.sf_abs(eta * t)


def thm4_hairy(seed, replicas=1000, n=100_000, eta=1.0, out_dir=None, workers=1):
    off, disp = "geometric:0.5", "regime:p=2,a+=1,a-=1"
    spec = _spec("thm4-hairy", seed, out_dir, "hairy", offspring=off, displacement=disp, n_grid=[n],
                 replicas=replicas, stats=["peaks"], params={"p": 2, "eta": eta})
    res = run_ensemble(spec, workers=workers)
    counts = res.values(n, "peaks")
    mean = float(counts.mean())
    exact = exact_peak_mean(off, disp, n, eta, 2.0)
    limit = 2.0 * eta**-4.0
    xs, ys = res.pooled(n, "peak_x"), res.pooled(n, "peak_y")
    p_ks = gof.ks_test(xs, lambda x: np.clip(x, 0, 1))
    fit = gof.tail_slope(np.abs(ys), xmin=eta, min_decades=0.3)
    v = [
        Verdict("peak-count-vs-exact", abs(mean / exact - 1) <= 0.10, mean, f"within 10% of {exact:.4g}",
                provenance=_prov("extract_peaks", eta=eta)),
        Verdict("peak-count-vs-limit", abs(mean / limit - 1) <= 0.15, mean, f"within 15% of {limit:.4g}",
                provenance=_prov("extract_peaks", eta=eta)),
        Verdict("peak-x-uniform", p_ks > 1e-3, p_ks, "KS p > 1e-3", p_value=p_ks,
                provenance=_prov("ks_test")),
        Verdict("peak-magnitude-slope", abs(fit.slope + 4.0) <= 0.3, fit.slope, "-4 +- 0.3",
                provenance=_prov("tail_slope", min_decades=0.3)),
    ]
    return {"hairy": _finish(res, v)}


def thm5_flat(seed, replicas=200, n=100_000, eta=0.1, p=0.6, out_dir=None, workers=1):
    off, disp = "geometric:0.5", f"regime:p={p},a+=1,a-=1"
    spec = _spec("thm5-flat", seed, out_dir, "flat", offspring=off, displacement=disp, n_grid=[n],
                 replicas=replicas, stats=["peaks", "small_jump_max"], params={"p": p, "eta": eta})
    res = run_ensemble(spec, workers=workers)
    alpha = parse_law(off).alpha
    kappa = p * alpha / (alpha - 1)
    ys = res.pooled(n, "peak_y")
    fit = gof.tail_slope(np.abs(ys), xmin=eta)
    med = float(np.median(res.values(n, "small_jump_max")))
    v = [
        Verdict("peak-magnitude-slope", abs(fit.slope + kappa) <= 0.2, fit.slope, f"{-kappa:.3g} +- 0.2",
                provenance=_prov("tail_slope")),
        Verdict("small-jump-median", med < 0.1, med, "median < 0.1", provenance=_prov("cutoff", eps=0.01)),
    ]
    return {"flat": _finish(res, v)}


def lemma_holder(seed, replicas=200, n_grid=(1000, 100_000), out_dir=None, workers=1):
    spec = _spec("lemma-holder", seed, out_dir, "holder", offspring="geometric:0.5", n_grid=list(n_grid),
                 replicas=replicas, stats=["holder@0.4", "holder@0.6"])
    res = run_ensemble(spec, workers=workers)
    q = {s: [float(np.quantile(res.values(n, s), 0.99)) for n in (n_grid[0], n_grid[-1])] for s in spec.stats}
    r4 = q["holder@0.4"][1] / q["holder@0.4"][0]
    r6 = q["holder@0.6"][1] / q["holder@0.6"][0]
    v = [
        Verdict("holder-0.4-stable", 0.5 < r4 < 2.0, r4, "p99 ratio within x2", provenance=_prov("holder_statistic", gamma=0.4)),
        Verdict("holder-0.6-grows", r6 > 2.0, r6, "p99 ratio > 2", provenance=_prov("holder_statistic", gamma=0.6)),
    ]
    return {"holder": _finish(res, v)}


def cor_inversions(seed, replicas=1000, n_grid=(1000, 10_000), out_dir=None, workers=1):
    """Scaled path length and scaled inversion fluctuations: the first should
    sit near E[int H] = sqrt(pi)/2, the second near mean zero."""
    spec = _spec("cor-inversions", seed, out_dir, "inversions", offspring="geometric:0.5", n_grid=list(n_grid),
                 replicas=replicas, stats=["scaled_path_length", "inversion_fluct"])
    res = run_ensemble(spec, workers=workers)
    n = n_grid[-1]
    a = res.values(n, "scaled_path_length")
    b = res.values(n, "inversion_fluct")
    za = (a.mean() - math.sqrt(math.pi) / 2) / (a.std(ddof=1) / math.sqrt(a.size))
    zb = b.mean() / (b.std(ddof=1) / math.sqrt(b.size))
    v = [
        Verdict("path-length-mean", abs(za) < 4, float(a.mean()), "z vs sqrt(pi)/2 within 4",
                provenance=_prov("total_path_length")),
        Verdict("inversion-fluct-centred", abs(zb) < 4, float(b.mean()), "z vs 0 within 4",
                provenance=_prov("inversions")),
    ]
    return {"inversions": _finish(res, v)}


EXPERIMENTS: Dict[str, Callable] = {
    "thm1-boundary": thm1_boundary,
    "thm2-noncentred": thm2_noncentred,
    "thm4-hairy": thm4_hairy,
    "thm5-flat": thm5_flat,
    "lemma-holder": lemma_holder,
    "cor-inversions": cor_inversions,
}


def run_named(name: str, seed: int, out_dir: Optional[str] = None, replicas: Optional[int] = None,
              workers: int = 1) -> Dict[str, EnsembleResult]:
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None
    kw = {"out_dir": out_dir, "workers": workers}
    if replicas is not None:
        kw["replicas"] = replicas
    return fn(seed, **kw)
