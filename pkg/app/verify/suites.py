"""
驗證套件
每個套件接受 (seed, samples)，回傳 CheckResult 清單；verify all 依序執行全部
"""

from __future__ import annotations

import logging
import math
import time
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import k0

from app.algebra import (
    BlockVector,
    CartanClass,
    adjoint,
    canonical_element,
    charpoly_coefficients,
    classify,
    invariants,
    normal_form,
    random_block,
    random_h,
    spectral_values,
)
from app.algebra.invariants import qs_batch
from app.dunkl import (
    PAIR_K,
    BivariatePolynomial,
    MultiplicityFunction,
    bracket_quotient,
    dunkl_commutator,
    opdam_check,
    opdam_exact,
    power_sum,
    product_sum,
    radial_apply,
    radial_residual,
    square_product,
    step_for,
    wall_distance,
)
from app.dunkl.radial import STENCIL_REACH
from app.eigendist import (
    OPERATORS,
    BasisFunction,
    InvariantPolynomial,
    TestFunctionJet,
    all_basis,
    broken_radial,
    gram_matrix,
    integrability_probe,
    matching_2,
    matching_m,
    radial,
    w_bracket_radial,
    weak_eigen,
)
from app.errors import AnalyzerError
from app.meanfn import (
    Signature,
    coefficient_check,
    fit_edges,
    gaussian,
    iterated_mean_density,
    mean_density,
    mean_density_2,
    singular_fit,
    stream,
)
from app.meanfn.fit import image_reach
from app.orbint import (
    QTestFunction,
    descent_psi3_batch,
    descent_psi_batch,
    hlog_check,
    hypair_check,
    orbital_densities,
    suggest_edges,
    weyl_check,
)
from app.config import settings
from app.schemas import CheckResult
from app.specfun import (
    EULER_GAMMA,
    Kind,
    SeriesSolution,
    a_coefficients,
    derivatives,
    ode_residual,
    wronskian_constant,
)

logger = logging.getLogger(__name__)

# 套件內的固定驗收門檻
TOLERANCES = {
    "invariance_rel": 1e-10,
    "normal_form_rel": 1e-8,
    "normal_form_min_regular": 1e-4,
    "k0_log_coefficient": 0.05,
    "k0_constant": 0.02,
    "bin_agreement": 0.95,
    "ode_residual": 1e-10,
    "abel": 1e-9,
    "a_coefficients": 1e-9,
    "opdam_rel": 1e-6,
    "constants_jet": 1e-10,
    "constants_fd": 1e-6,
    "radial_rel": 1e-5,
    "matching_m": 1e-6,
    "matching_limit": 1e-8,
    "matching_deriv": 1e-5,
    "negative_margin": 100.0,
    "weak_negative_sigma": 10.0,
    "weak_precision": 1e-3,
}

# 預設的正則特徵 χ = (λ₁, λ₂)
LAMBDAS = (1.3 + 0.4j, -0.7 + 0.2j)

SuiteFn = Callable[[int, int], list[CheckResult]]


def _guarded(name: str, fn: Callable[[], CheckResult]) -> CheckResult:
    """把領域錯誤轉成失敗的檢查，不中斷整個套件"""
    start = time.perf_counter()
    try:
        result = fn()
    except AnalyzerError as exc:
        logger.error(f"{name} 失敗：{exc}")
        result = CheckResult(name=name, passed=False, details=exc.to_dict())
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, f"{name}: {'通過' if result.passed else '失敗'}（{time.perf_counter() - start:.2f} 秒）")
    return result


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def chamber_points(cartan: CartanClass, rng: np.random.Generator, n: int, order: int = 4,
                   lo: float = 0.3, hi: float = 1.6, margin: float | None = None) -> list[tuple[float, float]]:
    """[lo, hi]² 內離根超平面夠遠、差分模板不越牆的隨機點"""
    margin = settings.chamber_margin if margin is None else margin
    out = []
    while len(out) < n:
        p = tuple(float(v) for v in rng.uniform(lo, hi, size=2))
        h = step_for(order, p)
        if wall_distance(cartan, p) >= (STENCIL_REACH + margin) * h * 1.01:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------


def _invariance(seed: int, n: int = 10_000) -> CheckResult:
    rng = stream(seed, 0, 11)
    worst = 0.0
    for _ in range(n):
        h = random_h(rng)
        X = random_block(rng)
        a, b = invariants(X), invariants(adjoint(h, X))
        ref = [a.Q, a.S, a.S0, a.delta, a.u, a.v]
        img = [b.Q, b.S, b.S0, b.delta, b.u, b.v]
        worst = max(worst, _rel(ref, img), _rel(charpoly_coefficients(X), charpoly_coefficients(adjoint(h, X))))
    tol = TOLERANCES["invariance_rel"]
    return CheckResult(name="algebra/invariance", passed=worst <= tol,
                       details={"pairs": n, "max_rel": worst, "tol": tol})


def _expected_class(u: complex, v: complex) -> CartanClass:
    if abs(u.imag) > 0:
        return CartanClass.A2
    if u.real > 0 and v.real > 0:
        return CartanClass.APP
    if u.real < 0 and v.real < 0:
        return CartanClass.AMM
    return CartanClass.APM


def _normal_form_round_trip(seed: int, n: int = 1_000) -> CheckResult:
    rng = stream(seed, 0, 12)
    floor = TOLERANCES["normal_form_min_regular"]
    tol = TOLERANCES["normal_form_rel"]
    worst_spec = worst_elem = 0.0
    class_miss = 0
    counts = {c.value: 0 for c in CartanClass}
    done = 0
    while done < n:
        X = random_block(rng)
        inv = invariants(X)
        if abs(inv.S * inv.S0) < floor:
            continue
        nf = normal_form(X)
        counts[nf.cartan_class.value] += 1
        u, v = spectral_values(nf.cartan_class, nf.params)
        got = sorted([u, v], key=lambda z: (z.real, z.imag))
        want = sorted([inv.u, inv.v], key=lambda z: (z.real, z.imag))
        worst_spec = max(worst_spec, _rel(want, got))
        image = adjoint(nf.h, X)
        worst_elem = max(worst_elem, _rel(canonical_element(nf.cartan_class, nf.params).to_vector(),
                                          image.to_vector()))
        if nf.cartan_class is not _expected_class(inv.u, inv.v):
            class_miss += 1
        done += 1
    passed = worst_spec <= tol and worst_elem <= tol and class_miss == 0
    return CheckResult(name="algebra/normal_form", passed=passed, details={
        "elements": n, "max_rel_spectrum": worst_spec, "max_rel_element": worst_elem,
        "class_mismatches": class_miss, "class_counts": counts, "tol": tol,
    })


def _nilpotent_zero() -> CheckResult:
    cl = classify(BlockVector.zero())
    out = cl.to_dict()
    return CheckResult(name="algebra/zero_is_nilpotent",
                       passed=out["class"] == "Nilpotent" and not out["in_U"], details=out)


def _invariants_example() -> CheckResult:
    # X^{++}_{2,1}：u = 4、v = 1
    inv = invariants(canonical_element(CartanClass.APP, (2.0, 1.0))).to_dict()
    expected = {"Q": 5.0, "S": 4.0, "S0": 9.0, "u": 4.0, "v": 1.0}
    ok = all(abs(inv[k] - v) < 1e-12 for k, v in expected.items())
    return CheckResult(name="algebra/invariants_example", passed=ok, details=inv)


def suite_algebra(seed: int, samples: int) -> list[CheckResult]:
    return [
        _guarded("algebra/invariance", lambda: _invariance(seed)),
        _guarded("algebra/normal_form", lambda: _normal_form_round_trip(seed)),
        _guarded("algebra/zero_is_nilpotent", _nilpotent_zero),
        _guarded("algebra/invariants_example", _invariants_example),
    ]


# ---------------------------------------------------------------------------
# meanfn
# ---------------------------------------------------------------------------


def _bin_average(fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, n: int = 8) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    return 0.5 * np.sum(w[None, :] * fn(pts), axis=1)


def _k0_oracle(seed: int, samples: int) -> CheckResult:
    """(1,1) 與 e^{−|y|²}：M f(t) = K₀(|t|)"""
    sig = Signature(1, 1)
    f = gaussian(2)
    reach = image_reach(sig, f)
    edges = np.concatenate([[-reach, -10.0], np.linspace(-3.0, 3.0, 121), [10.0, reach]])
    grid = mean_density(sig, f, edges, samples, seed)
    lo, hi = edges[:-1], edges[1:]
    window = (np.minimum(np.abs(lo), np.abs(hi)) >= 0.05 - 1e-12) & (np.maximum(np.abs(lo), np.abs(hi)) <= 3.0 + 1e-12)
    window &= np.sign(lo) == np.sign(hi)
    oracle = _bin_average(lambda t: k0(np.abs(t)), lo[window], hi[window])
    dev = np.abs(grid.density[window] - oracle)
    ok = dev <= settings.sigma_level * np.maximum(grid.stderr[window], 1e-300)
    frac = float(np.mean(ok))
    need = TOLERANCES["bin_agreement"]
    return CheckResult(name="meanfn/k0_density", passed=frac >= need, details={
        "bins": int(window.sum()), "fraction_within_sigma": frac, "required": need,
        "sigma_level": settings.sigma_level, "samples": samples,
    })


def _k0_expansion(seed: int, samples: int) -> CheckResult:
    """K₀(t) ≈ −log t + log 2 − γ"""
    sig = Signature(1, 1)
    f = gaussian(2)
    edges = fit_edges(settings.fit_t_min, settings.fit_t_max, settings.fit_probes, image_reach(sig, f))
    grid = mean_density(sig, f, edges, samples, seed)
    fit = singular_fit(grid, sig, "right")
    b, a = fit.phi1_limit, fit.phi0_limit
    a_ref = math.log(2.0) - EULER_GAMMA
    tol_b, tol_a = TOLERANCES["k0_log_coefficient"], TOLERANCES["k0_constant"]
    return CheckResult(name="meanfn/k0_expansion", passed=abs(b + 1.0) <= tol_b and abs(a - a_ref) <= tol_a,
                       details={"log_coefficient": b, "constant": a, "constant_expected": a_ref,
                                "tol_log_coefficient": tol_b, "tol_constant": tol_a, "fit": fit.to_dict()})


def _coefficients(seed: int, samples: int) -> CheckResult:
    rows, ok = [], True
    for p, q in ((2, 1), (1, 2), (2, 2)):
        check = coefficient_check(gaussian(p + q), Signature(p, q), 0, samples, seed)
        passed = check.deviation <= settings.sigma_level * max(check.measured_error, 1e-12)
        ok &= passed
        rows.append({"signature": [p, q], **check.to_dict(), "passed": passed})
    return CheckResult(name="meanfn/coefficients", passed=ok, details={"checks": rows})


def _iterated(seed: int, samples: int) -> CheckResult:
    """(1,1)×(2,1) 的 Gauss 乘積：聯合網格與巢狀網格一致"""
    sig1, sig2 = Signature(1, 1), Signature(2, 1)
    f = gaussian(5, half_width=6.0)
    outer = 2.0 * 36.0 + 1.0
    axis = np.concatenate([[-outer], np.linspace(-4.0, 4.0, 17), [outer]])
    edges2 = [axis, axis.copy()]
    joint = mean_density_2(sig1, sig2, f, edges2, samples, seed)
    n_inner = 64
    nested = iterated_mean_density(sig1, sig2, f, edges2, max(samples // n_inner, 2), n_inner, seed + 1)
    occupied = (joint.count > 0) & (nested.count > 0)
    occupied[[0, -1], :] = False
    occupied[:, [0, -1]] = False
    sigma = np.hypot(joint.stderr, nested.stderr)
    within = np.abs(joint.density - nested.density) <= settings.sigma_level * np.maximum(sigma, 1e-300)
    frac = float(np.mean(within[occupied])) if occupied.any() else 0.0
    need = TOLERANCES["bin_agreement"]
    return CheckResult(name="meanfn/iterated", passed=frac >= need, details={
        "occupied_bins": int(occupied.sum()), "fraction_within_sigma": frac, "required": need,
    })


def suite_meanfn(seed: int, samples: int) -> list[CheckResult]:
    return [
        _guarded("meanfn/k0_density", lambda: _k0_oracle(seed, samples)),
        _guarded("meanfn/k0_expansion", lambda: _k0_expansion(seed, samples)),
        _guarded("meanfn/coefficients", lambda: _coefficients(seed, samples)),
        _guarded("meanfn/iterated", lambda: _iterated(seed, samples)),
    ]


# ---------------------------------------------------------------------------
# orbint
# ---------------------------------------------------------------------------

# 跨過 t₂ = 0 的 U_m bump（u ≈ 1.44）與跨過 θ = 0 的 bump（u = v = 1）
HLOG_CENTER = (CartanClass.APP, (1.2, 0.0))
HYPAIR_CENTER = (CartanClass.A2, (1.0, 0.0))
ORBINT_RADIUS = 0.3


def _descent() -> CheckResult:
    rng = stream(0, 0, 13)
    pts = rng.uniform(-2.0, 2.0, size=(200, 3))
    x2 = descent_psi_batch(pts[:, :2])
    x3 = descent_psi3_batch(pts)
    Q2, _ = qs_batch(x2[:, :4].reshape(-1, 2, 2), x2[:, 4:].reshape(-1, 2, 2))
    Q3, _ = qs_batch(x3[:, :4].reshape(-1, 2, 2), x3[:, 4:].reshape(-1, 2, 2))
    err2 = float(np.max(np.abs(Q2 - (pts[:, 0] ** 2 - pts[:, 1] ** 2))))
    err3 = float(np.max(np.abs(Q3 - 2.0 * (pts[:, 0] ** 2 + pts[:, 1] ** 2 - pts[:, 2] ** 2))))
    return CheckResult(name="orbint/descent", passed=max(err2, err3) < 1e-12,
                       details={"max_error_psi": err2, "max_error_psi3": err3})


def _hlog_and_weyl(seed: int, samples: int) -> list[CheckResult]:
    cls, params = HLOG_CENTER
    f = QTestFunction.at(canonical_element(cls, params), ORBINT_RADIUS, name="bump_Um")
    edges = suggest_edges(f, seed=seed, log_window=(settings.fit_t_min, settings.fit_t_max))
    dens = orbital_densities(f, edges["m"], edges["2"], samples, seed, edges_r=edges["r"])
    u0 = params[0] ** 2
    reports = [hlog_check(dens, float(t1)) for t1 in u0 + np.linspace(-0.15, 0.15, 5)]
    hlog = CheckResult(name="orbint/hlog", passed=all(r.passed for r in reports),
                       details={"probes": [r.to_dict() for r in reports]})
    entries = weyl_check(f, dens, seed=seed)
    weyl = CheckResult(name="orbint/weyl", passed=all(e.passed for e in entries),
                       details={"entries": [e.to_dict() for e in entries]})
    return [hlog, weyl]


def _hypair(seed: int, samples: int) -> CheckResult:
    cls, params = HYPAIR_CENTER
    f = QTestFunction.at(canonical_element(cls, params), ORBINT_RADIUS, name="bump_wall")
    edges = suggest_edges(f, seed=seed)
    dens = orbital_densities(f, edges["m"], edges["2"], samples, seed, edges_r=edges["r"])
    reports = [hypair_check(dens, float(tau)) for tau in np.linspace(0.9, 1.1, 5)]
    return CheckResult(name="orbint/hypair", passed=all(r.passed for r in reports),
                       details={"probes": [r.to_dict() for r in reports]})


def suite_orbint(seed: int, samples: int) -> list[CheckResult]:
    out = [_guarded("orbint/descent", _descent)]
    try:
        out += _hlog_and_weyl(seed, samples)
    except AnalyzerError as exc:
        logger.error(f"orbint/hlog 失敗：{exc}")
        out.append(CheckResult(name="orbint/hlog", passed=False, details=exc.to_dict()))
    out.append(_guarded("orbint/hypair", lambda: _hypair(seed, samples)))
    return out


# ---------------------------------------------------------------------------
# specfun
# ---------------------------------------------------------------------------


def _ode_grid() -> CheckResult:
    re = np.linspace(-4.0, 4.0, 5)
    im = np.array([-1.0, 0.0, 0.5, 2.0])
    lams = [complex(a, b) for a in re for b in im]
    z = np.concatenate([-np.geomspace(1e-3, 8.0, 10), np.geomspace(1e-3, 8.0, 10)])
    tol = TOLERANCES["ode_residual"]
    worst = {}
    for kind in (Kind.PHI, Kind.W_REAL):
        rel = 0.0
        for lam in lams:
            sol = SeriesSolution(lam, kind)
            y, dy, d2y = derivatives(sol, z, 2)
            scale = 1.0 + np.abs(lam * y) + 4.0 * np.abs(z * d2y) + 4.0 * np.abs(dy)
            rel = max(rel, float(np.max(np.abs(ode_residual(sol, z)) / scale)))
        worst[kind.value] = rel
    return CheckResult(name="specfun/ode_residual", passed=max(worst.values()) <= tol,
                       details={"grid": [len(lams), len(z)], "max_rel": worst, "tol": tol})


def _abel() -> CheckResult:
    t = np.geomspace(1e-4, 1e2, 31)
    tol = TOLERANCES["abel"]
    worst = 0.0
    for lam in (0.5, -0.5, 0.3 + 0.4j, -1j, 1.0):
        worst = max(worst, float(np.max(np.abs(np.asarray(wronskian_constant(lam, t)) - 1.0))))
    return CheckResult(name="specfun/abel", passed=worst <= tol,
                       details={"t_range": [float(t[0]), float(t[-1])], "max_error": worst, "tol": tol})


def _a_coefficients() -> CheckResult:
    n = 1000
    a = a_coefficients(n)
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n + 1))])
    err = float(np.max(np.abs(a[: n + 1] - (2.0 * EULER_GAMMA - 2.0 * harmonic))))
    tol = TOLERANCES["a_coefficients"]
    return CheckResult(name="specfun/a_coefficients", passed=err <= tol, details={"n": n, "max_error": err, "tol": tol})


def suite_specfun(seed: int, samples: int) -> list[CheckResult]:
    return [
        _guarded("specfun/ode_residual", _ode_grid),
        _guarded("specfun/abel", _abel),
        _guarded("specfun/a_coefficients", _a_coefficients),
    ]


# ---------------------------------------------------------------------------
# dunkl
# ---------------------------------------------------------------------------


def _commutator(seed: int, n: int = 200) -> CheckResult:
    rng = stream(seed, 0, 21)
    ks = (PAIR_K, MultiplicityFunction.of(Fraction(1, 3), Fraction(2, 5)))
    nonzero = 0
    for _ in range(n):
        p = BivariatePolynomial.random(rng, int(rng.integers(0, 9)))
        for k in ks:
            if not dunkl_commutator(k, p).is_zero():
                nonzero += 1
    opdam_nonzero = 0
    for _ in range(20):
        p = BivariatePolynomial.random_invariant(rng, int(rng.integers(0, 9)))
        for sel in ("Q", "S"):
            if not opdam_exact(sel, p).is_zero():
                opdam_nonzero += 1
    return CheckResult(name="dunkl/commutator", passed=nonzero == 0 and opdam_nonzero == 0, details={
        "polynomials": n, "multiplicities": [k.to_dict() for k in ks],
        "nonzero_commutators": nonzero, "nonzero_exact_shifts": opdam_nonzero,
    })


def _opdam(seed: int, n_points: int) -> CheckResult:
    rng = stream(seed, 0, 22)
    points = chamber_points(CartanClass.APP, rng, n_points, lo=0.35, hi=1.8)
    lam1, lam2 = LAMBDAS
    tol = TOLERANCES["opdam_rel"]
    rows, ok = [], True
    for fn in (power_sum(), square_product(), product_sum(lam1, lam2), bracket_quotient(lam1, lam2)):
        for sel in ("Q", "S"):
            rep = opdam_check(sel, PAIR_K, fn, points, eigen=fn.eigen(sel))
            row = {"function": fn.name, "selector": sel, "max_relative_residual": rep.max_relative_residual}
            passed = rep.max_relative_residual <= tol
            if rep.eigen is not None:
                # S⁺ 是 D(1−k) 的特徵函數，[Φ,Φ]/δ 是 D(k) 的
                eigen_res = (rep.max_eigen_residual_shifted if fn.name.startswith("S+")
                             else rep.max_eigen_residual_dunkl)
                scale = 1.0 + max(abs(rep.eigen * p.value) for p in rep.points)
                row["eigen_relative_residual"] = eigen_res / scale
                passed &= eigen_res / scale <= tol
            row["passed"] = passed
            ok &= passed
            rows.append(row)
    return CheckResult(name="dunkl/opdam", passed=ok, details={"points": len(points), "tol": tol, "checks": rows})


# 各 Cartan 類別上 Q、S 的限制
_QS_ON_CLASS = {
    CartanClass.APP: (lambda a, b: a * a + b * b, lambda a, b: (a * b) ** 2),
    CartanClass.APM: (lambda a, b: a * a - b * b, lambda a, b: -((a * b) ** 2)),
    CartanClass.AMM: (lambda a, b: -(a * a + b * b), lambda a, b: (a * b) ** 2),
    CartanClass.A2: (lambda t, th: 2.0 * (t * t - th * th), lambda t, th: (t * t + th * th) ** 2),
}


def _constants(seed: int) -> CheckResult:
    """∂(Q)Q = 16、∂(S)S = 64：q 上的 jet 與各 Cartan 類別上的徑向算子"""
    rng = stream(seed, 0, 23)
    jet_err = 0.0
    for _ in range(10):
        X = random_block(rng)
        jet_err = max(jet_err, abs(complex(OPERATORS["Q"].apply(InvariantPolynomial("Q").jet(X, 2))) - 16.0),
                      abs(complex(OPERATORS["S"].apply(InvariantPolynomial("S").jet(X, 4))) - 64.0))
    fd_err = {}
    for cls, (q_fn, s_fn) in _QS_ON_CLASS.items():
        worst = 0.0
        for point in chamber_points(cls, rng, 5):
            worst = max(worst, abs(radial_apply(cls, "Q", q_fn, point).value - 16.0) / 16.0,
                        abs(radial_apply(cls, "S", s_fn, point).value - 64.0) / 64.0)
        fd_err[cls.value] = worst
    tol_jet, tol_fd = TOLERANCES["constants_jet"], TOLERANCES["constants_fd"]
    passed = jet_err <= tol_jet and max(fd_err.values()) <= tol_fd
    return CheckResult(name="dunkl/constants", passed=passed, details={
        "jet_error": jet_err, "radial_rel_error": fd_err, "tol_jet": tol_jet, "tol_radial": tol_fd,
    })


def _radial_system(seed: int, n_points: int) -> CheckResult:
    rng = stream(seed, 0, 24)
    tol = TOLERANCES["radial_rel"]
    points = {cls: chamber_points(cls, rng, n_points) for cls in CartanClass}
    worst, ok = {}, True
    for bf in all_basis(*LAMBDAS):
        rc = radial(bf)
        for cls in CartanClass:
            F = rc.on_class(cls)
            for op in ("Q", "S"):
                eigen = bf.chi(op)
                rel = 0.0
                for point in points[cls]:
                    res = radial_residual(cls, op, F, point, eigen, conjugated=True)
                    f0 = complex(np.asarray(F(np.array([point[0]]), np.array([point[1]]))).ravel()[0])
                    rel = max(rel, abs(res) / (1.0 + abs(eigen * f0)))
                worst[f"{bf.name}/{cls.value}/{op}"] = rel
                ok &= rel <= tol
    return CheckResult(name="dunkl/radial_system", passed=ok,
                       details={"points_per_class": n_points, "tol": tol, "max_rel": worst})


def suite_dunkl(seed: int, samples: int, n_points: int = 50) -> list[CheckResult]:
    return [
        _guarded("dunkl/commutator", lambda: _commutator(seed)),
        _guarded("dunkl/opdam", lambda: _opdam(seed, n_points)),
        _guarded("dunkl/constants", lambda: _constants(seed)),
        _guarded("dunkl/radial_system", lambda: _radial_system(seed, n_points)),
    ]


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

T1_VALUES = (-1.6, -1.1, -0.7, -0.4, -0.2, 0.2, 0.4, 0.7, 1.1, 1.6)
TAU_VALUES = tuple(np.round(np.linspace(0.3, 1.5, 10), 6))


def _matching_m_all() -> CheckResult:
    tol = TOLERANCES["matching_m"]
    rows, ok = [], True
    for bf in all_basis(*LAMBDAS):
        rc = radial(bf)
        for t1 in T1_VALUES:
            rep = matching_m(rc, t1, tol=tol)
            ok &= rep.passed
            rows.append(rep.to_dict())
    return CheckResult(name="matching/m", passed=ok, details={"tol": tol, "reports": rows})


def _matching_2_all() -> CheckResult:
    tol_l, tol_d = TOLERANCES["matching_limit"], TOLERANCES["matching_deriv"]
    rows, ok = [], True
    for bf in all_basis(*LAMBDAS):
        rc = radial(bf)
        for tau in TAU_VALUES:
            for side in ("direct", "varpi"):
                rep = matching_2(rc, float(tau), side, tol_limit=tol_l, tol_deriv=tol_d)
                ok &= rep.passed
                rows.append(rep.to_dict())
    return CheckResult(name="matching/two", passed=ok,
                       details={"tol_limit": tol_l, "tol_deriv": tol_d, "reports": rows})


def _negative_controls() -> list[CheckResult]:
    margin = TOLERANCES["negative_margin"]
    tol = TOLERANCES["matching_m"]
    broken = broken_radial(*LAMBDAS)
    rows, worst = [], math.inf
    for t1 in (0.4, 1.1):
        rep = matching_m(broken, t1, tol=tol)
        ratio = max(rep.jump0, rep.jump1) / (tol * rep.scale)
        worst = min(worst, ratio)
        rows.append({**rep.to_dict(), "failure_ratio": ratio})
    out = [CheckResult(name="matching/negative_broken", passed=worst >= margin,
                       details={"required_ratio": margin, "min_ratio": worst, "reports": rows})]

    tol_l, tol_d = TOLERANCES["matching_limit"], TOLERANCES["matching_deriv"]
    bracket = w_bracket_radial(*LAMBDAS)
    rows, worst = [], math.inf
    for tau in (0.5, 1.0):
        rep = matching_2(bracket, tau, "varpi", tol_limit=tol_l, tol_deriv=tol_d)
        ratio = max(abs(rep.limit) / tol_l, abs(rep.mismatch) / tol_d)
        worst = min(worst, ratio)
        rows.append({**rep.to_dict(), "failure_ratio": ratio})
    out.append(CheckResult(name="matching/negative_bracket", passed=worst >= margin,
                           details={"required_ratio": margin, "min_ratio": worst, "reports": rows}))
    return out


def suite_matching(seed: int, samples: int) -> list[CheckResult]:
    out = [_guarded("matching/m", _matching_m_all), _guarded("matching/two", _matching_2_all)]
    try:
        out += _negative_controls()
    except AnalyzerError as exc:
        logger.error(f"matching 負對照失敗：{exc}")
        out.append(CheckResult(name="matching/negative", passed=False, details=exc.to_dict()))
    return out


# ---------------------------------------------------------------------------
# weak / integrability
# ---------------------------------------------------------------------------

# 三個 bump 位置：U_m、U₃ 與 ϖ(U₃)，各附所需的開集旗標
WEAK_BUMPS = (
    ("bump_Um", CartanClass.APP, (1.6, 0.5), 0.3, "in_U_m"),
    ("bump_U3", CartanClass.A2, (1.0, 0.5), 0.3, "in_U3"),
    ("bump_varpiU3", CartanClass.A2, (0.5, 1.0), 0.3, "in_varpi_U3"),
)
REFERENCE_SAMPLES = 10_000_000


def weak_bump(name: str) -> tuple[TestFunctionJet, str]:
    for label, cls, params, radius, flag in WEAK_BUMPS:
        if label == name:
            return TestFunctionJet(canonical_element(cls, params).to_vector(), radius, name=label), flag
    raise ValueError(f"未知的 bump：{name}")


def _weak_bump(label: str, seed: int, samples: int) -> CheckResult:
    f, flag = weak_bump(label)
    rows, ok = [], True
    # 10⁷ 樣本時要求 σ < 10⁻³⟨|F|,f⟩，其他樣本數依 √n 換算
    precision = TOLERANCES["weak_precision"] * math.sqrt(REFERENCE_SAMPLES / samples)
    for bf in all_basis(*LAMBDAS):
        for P in ("Q", "S"):
            res = weak_eigen(bf, f, P, samples, seed, require=(flag,))
            rel_sigma = res.sigma / res.abs_mass if res.abs_mass > 0 else 0.0
            row = {**res.to_dict(), "relative_sigma": rel_sigma, "precision_target": precision}
            ok &= res.passed
            rows.append(row)
    return CheckResult(name=f"weak/{label}", passed=ok, details={"reports": rows})


def _weak_negative(seed: int, samples: int) -> CheckResult:
    f, flag = weak_bump("bump_Um")
    need = TOLERANCES["weak_negative_sigma"]
    rows, worst = [], math.inf
    for bf in (BasisFunction.ana(*LAMBDAS), BasisFunction.sing(*LAMBDAS)):
        res = weak_eigen(bf, f, "Q", samples, seed, chi_shift=1.0, require=(flag,))
        ratio = abs(res.estimate) / res.sigma if res.sigma > 0 else math.inf
        worst = min(worst, ratio)
        rows.append({**res.to_dict(), "sigma_ratio": ratio})
    return CheckResult(name="weak/negative_shift", passed=worst >= need,
                       details={"required_sigma": need, "min_ratio": worst, "reports": rows})


def _gram(seed: int, samples: int) -> CheckResult:
    f, _ = weak_bump("bump_Um")
    rep = gram_matrix(all_basis(*LAMBDAS), f, samples, seed)
    return CheckResult(name="weak/gram", passed=rep.passed, details=rep.to_dict())


def suite_weak(seed: int, samples: int) -> list[CheckResult]:
    out = [_guarded(f"weak/{label}", lambda label=label: _weak_bump(label, seed, samples))
           for label, *_ in WEAK_BUMPS]
    out.append(_guarded("weak/negative_shift", lambda: _weak_negative(seed, samples)))
    out.append(_guarded("weak/gram", lambda: _gram(seed, samples)))
    return out


def _integrability(name: str, bf: BasisFunction, singular_set: str, f: TestFunctionJet,
                   seed: int, samples: int) -> CheckResult:
    rep = integrability_probe(bf, singular_set, f, samples, seed)
    return CheckResult(name=name, passed=rep.passed, details=rep.to_dict())


def suite_integrability(seed: int, samples: int) -> list[CheckResult]:
    sing = BasisFunction.sing(*LAMBDAS)
    # {S = 0} ∩ U 上的點：v = 0、u = 1.44
    near_s = TestFunctionJet(canonical_element(CartanClass.APP, (1.2, 0.0)).to_vector(), 0.3, name="bump_S0")
    ball = TestFunctionJet(np.zeros(8), 0.5, name="ball_0")
    return [
        _guarded("integrability/sing_near_S",
                 lambda: _integrability("integrability/sing_near_S", sing, "S", near_s, seed, samples)),
        _guarded("integrability/sing_ball",
                 lambda: _integrability("integrability/sing_ball", sing, "ball", ball, seed, samples)),
    ]


SUITES: dict[str, SuiteFn] = {
    "algebra": suite_algebra,
    "meanfn": suite_meanfn,
    "orbint": suite_orbint,
    "specfun": suite_specfun,
    "dunkl": suite_dunkl,
    "matching": suite_matching,
    "weak": suite_weak,
    "integrability": suite_integrability,
}


def run_suite(name: str, seed: int, samples: int | None = None) -> list[CheckResult]:
    """執行單一套件或 all"""
    samples = settings.verify_samples if samples is None else samples
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"未知的驗證套件：{name}（可用：{', '.join([*SUITES, 'all'])}）")
    results: list[CheckResult] = []
    for suite in names:
        logger.info(f"開始驗證套件 {suite}（seed={seed}，samples={samples}）")
        results += SUITES[suite](seed, samples)
    passed = sum(r.passed for r in results)
    logger.info(f"驗證完成：{passed}/{len(results)} 項通過")
    return results
