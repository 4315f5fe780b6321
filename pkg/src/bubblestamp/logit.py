"""Logit regression of a bubble indicator on covariates.

The model is ``P(R_t = 1 | x_t) = Lambda(a + x_t'b)`` with ``Lambda`` the
logistic cdf. It is fitted by damped Newton steps from zero; the information
matrix ``X'WX`` is both the observed and expected information for this link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import expit, gammaincc

from .datestamp import BubbleIndicator
from .errors import (
    AllSameOutcome,
    CollinearCovariates,
    InputError,
    NoConvergence,
    NotConverged,
    PerfectSeparation,
)
from .series import Series, common_range, log_series

MAX_ITER = 100
MAX_HALVINGS = 20
GRAD_TOL = 1e-8
REPORT_GRAD_TOL = 1e-6
REL_LNL_TOL = 1e-12
SEPARATION_INDEX = 30.0
COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class CovariatePanel:
    """Named covariate columns on one common monthly range.

    ``transforms`` maps a name to ``"level"`` (default) or ``"log"``.
    """

    names: tuple[str, ...]
    columns: tuple[Series, ...]
    transforms: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "columns", tuple(self.columns))
        if len(self.names) != len(self.columns):
            raise InputError("names and columns differ in length")
        for name, col in zip(self.names, self.columns):
            if col.start != self.columns[0].start or len(col) != len(self.columns[0]):
                raise InputError(f"covariate {name} is not aligned with {self.names[0]}")
            tr = self.transforms.get(name, "level")
            if tr not in ("level", "log"):
                raise InputError(f"unknown transform {tr!r} for {name}")
            if tr == "log":
                log_series(col)

    @classmethod
    def from_mapping(cls, columns: Mapping[str, Series], transforms: Mapping[str, str] | None = None):
        return cls(tuple(columns), tuple(columns.values()), dict(transforms or {}))

    @property
    def start(self):
        return self.columns[0].start

    def __len__(self) -> int:
        return len(self.columns[0])

    def matrix(self) -> np.ndarray:
        cols = []
        for name, col in zip(self.names, self.columns):
            v = col.values
            cols.append(np.log(v) if self.transforms.get(name, "level") == "log" else v)
        return np.column_stack(cols) if cols else np.empty((0, 0))

    def between(self, first, last) -> "CovariatePanel":
        return CovariatePanel(self.names, tuple(c.between(first, last) for c in self.columns), self.transforms)


def align(indicator: BubbleIndicator | Series, covariates: Mapping[str, Series], transforms=None):
    """Trim an indicator and covariates to their common range.

    Returns ``(r, panel)`` with ``r`` an int array. Raises naming every input
    range when they do not overlap.
    """
    if isinstance(indicator, BubbleIndicator):
        ind = Series(indicator.start, indicator.r.astype(float), "indicator")
    else:
        ind = indicator
    inputs = {"indicator": ind, **covariates}
    try:
        first, last = common_range(list(inputs.values()))
    except InputError:
        ranges = ", ".join(f"{k}: {v.start}..{v.end}" for k, v in inputs.items())
        raise InputError(f"inputs do not overlap ({ranges})") from None
    r = ind.between(first, last).values
    if not np.all((r == 0) | (r == 1)):
        raise InputError("indicator values must be 0 or 1")
    panel = CovariatePanel.from_mapping({k: v.between(first, last) for k, v in covariates.items()}, transforms)
    return r.astype(np.int64), panel


@dataclass(frozen=True, eq=False)
class LogitFit:
    names: tuple[str, ...]  # regressors, intercept first as "const"
    beta: np.ndarray
    stderr: np.ndarray
    cov: np.ndarray
    lnL: float
    lnL_null: float
    lr_stat: float
    lr_pvalue: float
    mcfadden_r2: float
    n: int
    n_ones: int
    ame: np.ndarray
    mem: np.ndarray
    ame_se: np.ndarray
    mem_se: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float
    x_mean: np.ndarray
    lnl_gains: tuple[float, ...] = ()  # log-likelihood increase of each accepted step

    @property
    def df(self) -> int:
        return len(self.names) - 1

    @property
    def z(self) -> np.ndarray:
        return self.beta / self.stderr

    @property
    def pvalues(self) -> np.ndarray:
        return np.array([math.erfc(abs(z) / math.sqrt(2.0)) for z in self.z])

    def to_json(self) -> dict:
        coef = {
            name: {
                "beta": float(self.beta[i]),
                "stderr": float(self.stderr[i]),
                "pvalue": float(self.pvalues[i]),
            }
            for i, name in enumerate(self.names)
        }
        for j, name in enumerate(self.names[1:]):
            coef[name].update(
                ame=float(self.ame[j]),
                ame_se=float(self.ame_se[j]),
                mem=float(self.mem[j]),
                mem_se=float(self.mem_se[j]),
            )
        return {
            "coefficients": coef,
            "lnL": self.lnL,
            "lnL_null": self.lnL_null,
            "lr_stat": self.lr_stat,
            "lr_df": self.df,
            "lr_pvalue": self.lr_pvalue,
            "mcfadden_r2": self.mcfadden_r2,
            "n": self.n,
            "n_ones": self.n_ones,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_max_norm": self.grad_norm,
        }


def _loglik(y: np.ndarray, z: np.ndarray) -> float:
    # y*z - log(1 + e^z), written so large |z| neither overflows nor underflows
    return math.fsum(y * z - np.logaddexp(0.0, z))


def _loglik_gain(y: np.ndarray, d: np.ndarray, lam: np.ndarray) -> float:
    """``loglik(z + d) - loglik(z)`` accurate to the size of ``d``, not of the total.

    Uses ``softplus(z + d) - softplus(z) = log1p(lam(z) * expm1(d))``.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        terms = y * d - np.log1p(lam * np.expm1(d))
    # an overflowing trial step is simply rejected
    return math.fsum(terms) if np.all(np.isfinite(terms)) else -math.inf


def chi2_sf(stat: float, df: int) -> float:
    """Upper tail of the chi-square distribution via the regularised gamma function."""
    if df == 0:
        return 1.0 if stat <= 0 else 0.0
    return float(gammaincc(df / 2.0, max(stat, 0.0) / 2.0))


def _design(x) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(x, CovariatePanel):
        m, names = x.matrix(), x.names
    else:
        m = np.asarray(x, dtype=float)
        if m.ndim == 1:
            m = m[:, None]
        names = tuple(f"x{j + 1}" for j in range(m.shape[1]))
    return m, names


def _check_rank(X: np.ndarray, names) -> None:
    scale = np.sqrt((X * X).sum(axis=0))
    if np.any(scale == 0):
        bad = [names[j] for j in np.flatnonzero(scale == 0)]
        raise CollinearCovariates(f"all-zero covariate(s): {bad}")
    sv = np.linalg.svd(X / scale, compute_uv=False)
    if sv[-1] == 0 or (sv[0] / sv[-1]) ** 2 > COND_LIMIT:
        raise CollinearCovariates(f"covariates {list(names[1:])} are collinear with each other or the intercept")


def fit_logit(r, x) -> LogitFit:
    """Maximum-likelihood logit of ``r`` (0/1) on an intercept plus ``x``.

    ``x`` is a CovariatePanel or an (n, k) array; k may be zero.
    """
    y = np.asarray(r.r if isinstance(r, BubbleIndicator) else r, dtype=float).ravel()
    m, cov_names = _design(x)
    n = y.size
    if m.size == 0:
        m = np.empty((n, 0))
    if m.shape[0] != n:
        raise InputError(f"indicator has {n} rows, covariates {m.shape[0]}")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("indicator values must be 0 or 1")
    n1 = int(y.sum())
    if n1 in (0, n):
        raise AllSameOutcome(f"indicator is constant ({n1} ones in {n})")
    names = ("const",) + tuple(cov_names)
    X = np.column_stack([np.ones(n), m])
    p = X.shape[1]
    if n < 10 * p:
        raise InputError(f"{n} observations for {p} parameters; need at least {10 * p}")
    _check_rank(X, names)

    beta = np.zeros(p)
    z = X @ beta
    ll = _loglik(y, z)
    gains = []
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        mu = expit(z)
        grad = X.T @ (y - mu)
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < GRAD_TOL:
            converged = True
            break
        info = X.T @ (X * (mu * (1.0 - mu))[:, None])
        step = np.linalg.solve(info, grad)
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + t * step
            d = X @ (t * step)
            gain = _loglik_gain(y, d, mu)
            if gain > 0:
                break
            t *= 0.5
        else:
            # no measurable ascent left
            if gnorm < REPORT_GRAD_TOL:
                converged = True
                break
            raise NoConvergence(f"step halving failed at iteration {it} (gradient {gnorm:.3g})")
        zc = X @ cand
        if np.max(np.abs(zc)) > SEPARATION_INDEX:
            raise PerfectSeparation(
                "fitted probabilities reach 0 or 1 (|linear index| > "
                f"{SEPARATION_INDEX:g}); the likelihood has no finite maximum"
            )
        beta, z = cand, zc
        ll = _loglik(y, z)
        gains.append(gain)
        if gain <= REL_LNL_TOL * abs(ll):
            g2 = float(np.max(np.abs(X.T @ (y - expit(z)))))
            if g2 < REPORT_GRAD_TOL:
                converged = True
                break
    if not converged:
        raise NoConvergence(f"no convergence in {MAX_ITER} iterations")

    mu = expit(z)
    grad_norm = float(np.max(np.abs(X.T @ (y - mu))))
    info = X.T @ (X * (mu * (1.0 - mu))[:, None])
    cov = np.linalg.inv(info)
    stderr = np.sqrt(np.diag(cov))

    pbar = n1 / n
    ll_null = n1 * math.log(pbar) + (n - n1) * math.log(1.0 - pbar)
    # the full model nests the null one; negative gaps are rounding only
    lr = max(0.0, 2.0 * (ll - ll_null))
    df = p - 1
    x_mean = X.mean(axis=0)
    ame, ame_se = _ame(beta, cov, X)
    mem, mem_se = _mem(beta, cov, x_mean)
    return LogitFit(
        names=names,
        beta=beta,
        stderr=stderr,
        cov=cov,
        lnL=ll,
        lnL_null=ll_null,
        lr_stat=lr,
        lr_pvalue=chi2_sf(lr, df),
        mcfadden_r2=1.0 - ll / ll_null,
        n=n,
        n_ones=n1,
        ame=ame,
        mem=mem,
        ame_se=ame_se,
        mem_se=mem_se,
        converged=converged,
        iterations=it,
        grad_norm=grad_norm,
        x_mean=x_mean,
        lnl_gains=tuple(gains),
    )


def _density(z):
    lam = expit(z)
    return lam * (1.0 - lam)


def _ame(beta, cov, X):
    """Average marginal effects with delta-method standard errors."""
    z = X @ beta
    lam = expit(z)
    phi = lam * (1.0 - lam)
    slopes = beta[1:]
    ame = phi.mean() * slopes
    # d ame_j / d beta = mean(phi (1 - 2 lam) x') * b_j + mean(phi) e_j
    dphi = (phi * (1.0 - 2.0 * lam)) @ X / X.shape[0]
    jac = np.outer(slopes, dphi)
    jac[:, 1:] += phi.mean() * np.eye(slopes.size)
    se = np.sqrt(np.einsum("ij,jk,ik->i", jac, cov, jac))
    return ame, se


def _mem(beta, cov, xbar):
    z = float(xbar @ beta)
    lam = float(expit(z))
    phi = lam * (1.0 - lam)
    slopes = beta[1:]
    mem = phi * slopes
    jac = np.outer(slopes, phi * (1.0 - 2.0 * lam) * xbar)
    jac[:, 1:] += phi * np.eye(slopes.size)
    se = np.sqrt(np.einsum("ij,jk,ik->i", jac, cov, jac))
    return mem, se


def marginal_effects(fit: LogitFit, x, mode: str = "averaged") -> np.ndarray:
    """Marginal effects ``phi(x'b) * b_j`` evaluated on the rows of ``x``.

    ``mode="at_means"`` evaluates at the column means of ``x``;
    ``mode="averaged"`` averages the per-row effects.
    """
    if not fit.converged:
        raise NotConverged("marginal effects need a converged fit")
    m, _ = _design(x)
    X = np.column_stack([np.ones(m.shape[0]), m])
    slopes = fit.beta[1:]
    if mode == "at_means":
        return _density(X.mean(axis=0) @ fit.beta) * slopes
    if mode == "averaged":
        return _density(X @ fit.beta).mean() * slopes
    raise InputError(f"mode must be 'at_means' or 'averaged', got {mode!r}")


def lr_test(fit: LogitFit) -> tuple[float, float]:
    """Likelihood-ratio test of all slopes being zero: ``(statistic, p-value)``."""
    if not fit.converged:
        raise NotConverged("LR test needs a converged fit")
    return fit.lr_stat, chi2_sf(fit.lr_stat, fit.df)


def _stars(p: float) -> str:
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.1 else ""


def format_report(fit: LogitFit, title: str = "") -> str:
    """Plain-text table: coefficient (stderr) and both marginal effects per row."""
    lines = []
    if title:
        lines.append(title)
    hdr = f"{'':<18}{'Coefficient':>16}{'ME (average)':>16}{'ME (at means)':>16}"
    lines.append(hdr)
    lines.append("-" * len(hdr))
    pv = fit.pvalues
    order = list(range(1, len(fit.names))) + [0]
    for i in order:
        name = "constant" if i == 0 else fit.names[i]
        coef = f"{fit.beta[i]:.4f}{_stars(pv[i])}"
        if i == 0:
            lines.append(f"{name:<18}{coef:>16}")
            lines.append(f"{'':<18}{f'({fit.stderr[i]:.4f})':>16}")
            continue
        j = i - 1
        p_ame = math.erfc(abs(fit.ame[j] / fit.ame_se[j]) / math.sqrt(2.0))
        p_mem = math.erfc(abs(fit.mem[j] / fit.mem_se[j]) / math.sqrt(2.0))
        lines.append(
            f"{name:<18}{coef:>16}{f'{fit.ame[j]:.4f}{_stars(p_ame)}':>16}{f'{fit.mem[j]:.4f}{_stars(p_mem)}':>16}"
        )
        lines.append(
            f"{'':<18}{f'({fit.stderr[i]:.4f})':>16}{f'({fit.ame_se[j]:.4f})':>16}{f'({fit.mem_se[j]:.4f})':>16}"
        )
    lines.append("-" * len(hdr))
    for label, value in (
        ("Log likelihood", f"{fit.lnL:.4f}"),
        ("LR statistic", f"{fit.lr_stat:.4f}"),
        (f"Prob>Chi2({fit.df})", f"{fit.lr_pvalue:.4f}"),
        ("Observations", f"{fit.n}"),
        ("McFadden's R^2", f"{fit.mcfadden_r2:.4f}"),
    ):
        lines.append(f"{label:<18}{value:>16}")
    lines.append("***, **, * : significant at 1%, 5%, 10%")
    return "\n".join(lines)

