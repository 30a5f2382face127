"""Numerical certification of the passivity assumptions on laws and blocks.

Checks sample a deterministic low-discrepancy set plus seeded uniform points;
failures are report entries with concrete witness points, never exceptions.
Strict inequalities are tested with an absolute margin so that re-evaluating
a witness reproduces the violation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beam_model import PassiveBlock, SpringDamperLaw, _storage_hessian

#: absolute margin for strict inequalities
STRICT_MARGIN = 1e-9

#: sampled points closer to the origin than this fraction of the radius are
#: skipped by sign checks (the laws vanish there by construction)
_INNER_FRACTION = 1e-3

_GRID_POINTS = 257
_BLOCK_GRID_POINTS = 512

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: tuple[float, ...] | None
    value: float

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "witness": list(self.witness) if self.witness is not None else None,
            "value": self.value,
        }


@dataclass(frozen=True)
class CertReport:
    """Outcome of one certification run; ``passed`` is the conjunction of all
    per-check flags and every failed check carries a witness point."""

    passed: bool
    checks: list[CheckResult]
    sample_radius: float
    sample_count: int

    def as_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "sample_radius": self.sample_radius,
            "sample_count": self.sample_count,
            "checks": [c.as_dict() for c in self.checks],
        }

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _finish(checks: list[CheckResult], radius: float, count: int) -> CertReport:
    checks = sorted(checks, key=lambda c: c.name)
    return CertReport(
        passed=all(c.passed for c in checks),
        checks=checks,
        sample_radius=radius,
        sample_count=count,
    )


def _halton(index: int, base: int) -> float:
    result = 0.0
    f = 1.0
    i = index
    while i > 0:
        f /= base
        result += f * (i % base)
        i //= base
    return result


def _ball_points(dim: int, radius: float, n_halton: int, n_uniform: int, seed: int) -> np.ndarray:
    """Low-discrepancy plus seeded uniform points in the ball of given radius,
    excluding a small inner ball. Prefixes are stable: enlarging the counts
    extends the sample set."""
    r_min = _INNER_FRACTION * radius
    accepted = []
    idx = 1
    while len(accepted) < n_halton and idx <= 100 * n_halton + 1000:
        point = np.array([2.0 * _halton(idx, _PRIMES[d]) - 1.0 for d in range(dim)]) * radius
        idx += 1
        r = np.linalg.norm(point)
        if r_min <= r <= radius:
            accepted.append(point)
    rng = np.random.default_rng(seed)
    taken = 0
    while taken < n_uniform:
        point = rng.uniform(-radius, radius, size=dim)
        r = np.linalg.norm(point)
        if r_min <= r <= radius:
            accepted.append(point)
            taken += 1
    return np.array(accepted)


def _law_samples(radius: float, samples: int, seed: int) -> np.ndarray:
    grid = np.linspace(-radius, radius, _GRID_POINTS)
    rng = np.random.default_rng(seed)
    extra = rng.uniform(-radius, radius, size=samples)
    pts = np.concatenate([grid, extra])
    return pts[np.abs(pts) >= _INNER_FRACTION * radius]


def _simpson_129(f, upper: float) -> float:
    """Composite Simpson with 129 nodes on [0, upper]."""
    x = np.linspace(0.0, upper, 129)
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape != x.shape:
            raise ValueError
    except Exception:
        y = np.array([float(f(v)) for v in x])
    h = upper / 128.0
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def _worst(points, values, flip: bool = False):
    """(worst value, witness) with 'worst' meaning smallest (or largest if flip)."""
    values = np.asarray(values, dtype=float)
    idx = int(np.argmax(values)) if flip else int(np.argmin(values))
    witness = np.atleast_1d(points[idx])
    return float(values[idx]), tuple(float(w) for w in witness)


def certify_spring_damper(
    law: SpringDamperLaw, radius: float, samples: int, seed: int = 0
) -> CertReport:
    """Check the damper/spring assumptions on [-radius, radius].

    The damper must vanish at the origin, have a nonnegative derivative
    everywhere sampled (the monotone reading of the damper assumption) and a
    strictly positive origin slope; the spring must have a strictly positive
    origin slope and a positive potential (129-node Simpson) off the origin.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if samples < 100:
        raise ValueError("samples must be >= 100")
    pts = _law_samples(radius, samples, seed)
    checks = []

    d0 = float(law.damper.eval(0.0))
    checks.append(
        CheckResult("damper-vanishes-at-zero", abs(d0) <= STRICT_MARGIN,
                    None if abs(d0) <= STRICT_MARGIN else (0.0,), d0)
    )

    dprime = np.asarray([float(law.damper.deriv(s)) for s in pts])
    worst, witness = _worst(pts, dprime)
    ok = worst >= -STRICT_MARGIN
    checks.append(
        CheckResult("damper-derivative-nonnegative", ok, None if ok else witness, worst)
    )

    dslope = float(law.damper.deriv(0.0))
    ok = dslope >= STRICT_MARGIN
    checks.append(CheckResult("damper-slope-positive", ok, None if ok else (0.0,), dslope))

    kslope = float(law.spring.deriv(0.0))
    ok = kslope >= STRICT_MARGIN
    checks.append(CheckResult("spring-slope-positive", ok, None if ok else (0.0,), kslope))

    k0 = float(law.spring.eval(0.0))
    checks.append(
        CheckResult("spring-vanishes-at-zero", abs(k0) <= STRICT_MARGIN,
                    None if abs(k0) <= STRICT_MARGIN else (0.0,), k0)
    )

    potentials = np.asarray([_simpson_129(law.spring.eval, s) for s in pts])
    worst, witness = _worst(pts, potentials)
    ok = worst >= STRICT_MARGIN
    checks.append(
        CheckResult("spring-potential-positive", ok, None if ok else witness, worst)
    )

    return _finish(checks, radius, len(pts))


def certify_block(
    block: PassiveBlock, radius: float, samples: int, h_threshold: float = 0.0, seed: int = 0
) -> CertReport:
    """Check the strict-passivity assumptions of a block in the ball of the
    given radius.

    Positivity of the storage, strict dissipation of the drift, the
    KYP output identity, definiteness of the storage Hessian, invertibility
    of the drift Jacobian, and negative semidefiniteness of P A are sampled;
    radial growth is certified only up to the radius, against ``h_threshold``.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if samples < 100 * block.dim:
        raise ValueError(f"samples must be >= {100 * block.dim} for dim {block.dim}")
    pts = _ball_points(block.dim, radius, _BLOCK_GRID_POINTS, samples, seed)
    checks = []

    storage = np.array([float(block.storage(z)) for z in pts])
    worst, witness = _worst(pts, storage)
    ok = worst >= STRICT_MARGIN
    checks.append(CheckResult("storage-positive", ok, None if ok else witness, worst))

    dissipation = np.array(
        [float(np.asarray(block.storage_grad(z)) @ np.asarray(block.drift(z))) for z in pts]
    )
    worst, witness = _worst(pts, dissipation, flip=True)
    ok = worst <= -STRICT_MARGIN
    checks.append(CheckResult("dissipation-strict", ok, None if ok else witness, worst))

    kyp = np.array(
        [
            abs(
                float(np.asarray(block.storage_grad(z)) @ np.asarray(block.input_gain(z)))
                - float(block.output(z))
            )
            / (1.0 + abs(float(block.output(z))))
            for z in pts
        ]
    )
    worst, witness = _worst(pts, kyp, flip=True)
    ok = worst <= STRICT_MARGIN
    checks.append(CheckResult("kyp-output-match", ok, None if ok else witness, worst))

    hess = _storage_hessian(block)
    hess = 0.5 * (hess + hess.T)
    eigvals, eigvecs = np.linalg.eigh(hess)
    ok = bool(eigvals[0] >= STRICT_MARGIN)
    checks.append(
        CheckResult(
            "hessian-positive-definite", ok,
            None if ok else tuple(float(w) for w in eigvecs[:, 0]), float(eigvals[0]),
        )
    )

    amat = np.asarray(block.drift_jac(np.zeros(block.dim)), dtype=float)
    svals = np.linalg.svd(amat, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0.0 else np.inf
    ok = bool(np.isfinite(cond) and cond <= 1e12)
    direction = np.linalg.svd(amat)[2][-1]
    checks.append(
        CheckResult("drift-jacobian-invertible", ok, None if ok else tuple(float(w) for w in direction), cond)
    )

    sphere = pts * (radius / np.linalg.norm(pts, axis=1))[:, None]
    sphere_storage = np.array([float(block.storage(z)) for z in sphere])
    worst, witness = _worst(sphere, sphere_storage)
    ok = bool(worst > h_threshold)
    checks.append(CheckResult("radial-growth", ok, None if ok else witness, worst))

    pa = hess @ amat
    rayleigh = np.array([float(z @ (pa @ z)) / float(z @ z) for z in pts])
    worst, witness = _worst(pts, rayleigh, flip=True)
    ok = worst <= STRICT_MARGIN
    checks.append(
        CheckResult("pa-negative-semidefinite", ok, None if ok else witness, worst)
    )

    return _finish(checks, radius, len(pts))
