"""Identity and inequality suites over a corpus.

"Exact" suites check discrete identities or inequalities that hold for every
lattice realization and count any violation beyond the stated slack as a
failure.  "Empirical" suites compute constants (ratios of the two sides of an
inequality whose constant is not quantified) and fail only on non-finite
values; their refinement stability is checked by ``refinement_stability``.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..grid import Cube, CubeFamily, Exponents, count_all_cubes
from ..lipschitz import (
    _char_profiles,
    _flat_windows,
    equivalence_ratio,
    lip_norm,
    lip_norm_equivalence_table,
    oscillation_bound_constant,
    pointwise_lip_constant,
    restricted_maxima,
)
from ..operators import (
    _batch_max,
    all_cube_masks,
    commutator_maximal,
    commutator_sharp,
    hl_maximal,
    hl_maximal_batch,
    maximal_commutator,
    maximal_commutator_batch,
    sharp_maximal_batch,
    weighted_fractional_maximal,
)
from ..weights import a1_constant, a1_constant_pointwise, doubling_ratio, interior_cubes
from .corpus import _weight_tag
from .report import VerificationReport

IDENTITY_TOL = 1e-12
CHAIN_TOL = 1e-10
MONOTONE_TOL = 1e-9
MAX_SKIP_FRACTION = 0.5
_BATCH = 128


class SuiteError(RuntimeError):
    """A suite could not produce a meaningful result (e.g. too many skipped terms)."""


def _family(grid, family):
    return CubeFamily(grid, "all") if family is None else family


def suite_cubes(grid, family=None, max_cubes: int | None = 5000, seed: int = 0):
    """Cubes a per-cube suite runs over: the family, or a seeded sample of the all-family."""
    if family is not None:
        return list(family), family.mode
    if max_cubes is not None and count_all_cubes(grid.shape) > max_cubes:
        return list(CubeFamily(grid, "sampled", k=max_cubes, seed=seed)), "sampled"
    return list(CubeFamily(grid, "all")), "all"


def _chunks(items, size=_BATCH):
    for start in range(0, len(items), size):
        yield items[start:start + size]


def _restrictions(values, cubes):
    stack = np.zeros((len(cubes),) + values.shape)
    for i, q in enumerate(cubes):
        stack[(i,) + q.slices] = values[q.slices]
    return stack


def _where(q: Cube, **extra):
    out = {"cube": q.to_dict()}
    out.update(extra)
    return out


def _finite(rep, values, check, **where):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    rep.record(np.where(np.isfinite(values), 0.0, 1.0), 0.0, 0.0, where or None, check)


def _bound_skips(rep, skipped, total):
    rep.info["skipped_terms"] = int(skipped)
    rep.info["total_terms"] = int(total)
    if total == 0 or skipped > MAX_SKIP_FRACTION * total:
        raise SuiteError(f"{rep.suite}: {skipped} of {total} terms skipped (zero denominators)")


# -- pointwise domination ----------------------------------------------------


def verify_pointwise_domination(corpus, family: CubeFamily | None = None) -> VerificationReport:
    """|[b,M]f| <= M_b f and |[b,M#]f| <= 2 M_b f at every point, for b >= 0.

    Sign-changing symbols are run as controls: their violations are counted in
    ``info`` and do not fail the suite.
    """
    family = _family(corpus.grid, family)
    rep = VerificationReport("pointwise_domination")
    controls = {}
    for bm in corpus.symbols:
        b = bm.function
        for fm in corpus.functions:
            f = fm.function
            mb = maximal_commutator(b, f, family).array
            cm = np.abs(commutator_maximal(b, f, family).values)
            cs = np.abs(commutator_sharp(b, f, family).values)
            tol = IDENTITY_TOL * max(1.0, float(np.abs(b.values).max() * np.abs(f.values).max()))
            where = {"b": bm.name, "f": fm.name}
            if bm.nonnegative:
                rep.record(cm, mb, tol, where, "[b,M]")
                rep.record(cs, 2 * mb, tol, where, "[b,M#]")
            else:
                n_bad = int(np.sum(cm > mb + tol) + np.sum(cs > 2 * mb + tol))
                controls[f"{bm.name}/{fm.name}"] = n_bad
    rep.info["control_violations"] = controls
    rep.info["control_total"] = int(sum(controls.values()))
    return rep


# -- restriction identities ----------------------------------------------------


def _overlap_counts(cubes, side, shape):
    """|R cap Q| (lattice points) for every anchor of side ``side`` and each Q."""
    d = len(shape)
    out = np.ones((len(cubes),) + tuple(n - side + 1 for n in shape))
    for ax in range(d):
        b = np.arange(shape[ax] - side + 1)
        a = np.array([q.anchor[ax] for q in cubes])[:, None]
        s = np.array([q.side for q in cubes])[:, None]
        ov = np.clip(np.minimum(a + s, b + side) - np.maximum(a, b), 0, None)
        expand = [1] * (d + 1)
        expand[0] = len(cubes)
        expand[ax + 1] = ov.shape[1]
        out = out * ov.reshape(expand)
    return out


def sharp_indicator_closed_form(cubes, shape):
    """M#(chi_Q) = max over R containing x of 2t(1-t), t = |R cap Q| / |R|.

    Returns (values, halving) where ``halving`` marks points lying in some cube
    R with |R cap Q| = |R|/2 exactly, i.e. where M#(chi_Q) = 1/2.
    """
    d = len(shape)
    masks = all_cube_masks(shape)
    template = np.zeros((len(cubes),) + tuple(shape))

    def value(side):
        c = _overlap_counts(cubes, side, shape)
        n = float(side**d)
        return 2.0 * c * (n - c) / (n * n)

    def halving(side):
        c = _overlap_counts(cubes, side, shape)
        return (2 * c == side**d).astype(float)

    return _batch_max(template, masks, value), _batch_max(template, masks, halving) > 0


def _superset_sides(q: Cube, shape, dim):
    return [s for s in range(q.side + 1, min(shape) + 1)]


def margin_feasible(q: Cube, shape, dim) -> bool:
    """An in-domain cube R containing Q with |R| = 2|Q| exists."""
    return any(s**dim == 2 * q.side**dim for s in _superset_sides(q, shape, dim))


def side_margin(q: Cube, shape) -> bool:
    """Some axis leaves at least ``side`` points beyond Q on one side."""
    return any(a >= q.side or n - a - q.side >= q.side for a, n in zip(q.anchor, shape))


FEASIBILITY = ("double_measure", "side_margin")


def best_superset_factor(q: Cube, shape, dim) -> float:
    """max of 2t(1-t), t = |Q|/|R|, over in-domain cubes R strictly containing Q (0 if none)."""
    best = 0.0
    for s in _superset_sides(q, shape, dim):
        t = (q.side / s) ** dim
        best = max(best, 2 * t * (1 - t))
    return best


def verify_restriction_identities(corpus, family: CubeFamily | None = None,
                                  max_cubes: int | None = 5000, seed: int = 0,
                                  members=None, feasibility: str = "double_measure"
                                  ) -> VerificationReport:
    """The four restriction identities on every cube Q.

    (i)   M(chi_Q) = 1 on Q, exactly;
    (ii)  M(b chi_Q) = M_Q(b) on Q;
    (iii) M#(chi_Q) <= 1/2 everywhere, = 1/2 where a halving cube exists, and
          equal to its closed form;
    (iv)  |b_Q| <= 2 M#(b chi_Q) on Q when Q is margin-feasible.  For other Q
          the weaker 2t(1-t)|b_Q| <= M#(b chi_Q) is asserted with the best
          available t, and the outcome of the unscaled form is logged.

    ``feasibility`` selects which cubes must satisfy the unscaled (iv):
    ``"double_measure"`` (some in-domain R contains Q with |R| = 2|Q|, which
    is what the bound needs) or ``"side_margin"`` (some axis has ``side``
    spare points on one side of Q; sufficient in 1D only).  The other rule's
    outcome is counted in ``info["iv_by_rule"]``.

    Operators run over the global all-family; ``family`` only selects the Q's.
    """
    if feasibility not in FEASIBILITY:
        raise ValueError(f"feasibility must be one of {FEASIBILITY}, got {feasibility!r}")
    grid = corpus.grid
    shape, d = grid.shape, grid.dim
    cubes, mode = suite_cubes(grid, family, max_cubes, seed)
    masks = all_cube_masks(shape)
    if members is None:
        members = list(corpus.symbols) + list(corpus.functions)
    rep = VerificationReport("restriction_identities")
    rep.info.update({"cube_mode": mode, "n_cubes": len(cubes), "members": [m.name for m in members]})
    feasible = {"margin_feasible": 0, "generalized": 0, "no_superset": 0}
    unscaled = {"checked_infeasible": 0, "violations_infeasible": 0}
    halving_points = 0
    by_rule = {r: {"cases": 0, "violations": 0} for r in FEASIBILITY}

    for chunk in _chunks(cubes):
        ind = _restrictions(np.ones(shape), chunk)
        m_ind = hl_maximal_batch(ind, masks)
        s_ind = sharp_maximal_batch(ind, masks)
        closed, halving = sharp_indicator_closed_form(chunk, shape)
        rep.record(s_ind, 0.5, IDENTITY_TOL, None, "(iii) M#(chi_Q) <= 1/2")
        rep.record(np.abs(s_ind - closed), 0.0, IDENTITY_TOL, None, "(iii) closed form")
        for k, q in enumerate(chunk):
            rep.record(np.abs(m_ind[k][q.slices] - 1.0), 0.0, 0.0, _where(q), "(i) M(chi_Q) = 1")
            on = halving[k][q.slices]
            halving_points += int(on.sum())
            rep.record(np.abs(s_ind[k][q.slices][on] - 0.5), 0.0, IDENTITY_TOL, _where(q),
                       "(iii) M#(chi_Q) = 1/2")
        kinds, rules = [], []
        for q in chunk:
            rule = {"double_measure": margin_feasible(q, shape, d),
                    "side_margin": side_margin(q, shape)}
            rules.append(rule)
            if rule[feasibility]:
                kinds.append(("margin", 1.0))
            else:
                kinds.append(("generalized", best_superset_factor(q, shape, d)))

        for member in members:
            b = member.function
            stack = _restrictions(b.values, chunk)
            mglob = hl_maximal_batch(stack, masks)
            mloc = restricted_maxima(b, chunk)
            sharp = sharp_maximal_batch(stack, masks)
            for k, q in enumerate(chunk):
                box = b.values[q.slices]
                scale = float(np.abs(box).max())
                where = _where(q, b=member.name)
                rep.record(np.abs(mglob[k][q.slices] - mloc[k]), 0.0, IDENTITY_TOL * scale,
                           where, "(ii) M(b chi_Q) = M_Q(b)")
                bq = abs(float(box.mean()))
                ms = sharp[k][q.slices]
                kind, factor = kinds[k]
                tol = IDENTITY_TOL * max(scale, 1.0)
                for rule, ok in rules[k].items():
                    if ok:
                        by_rule[rule]["cases"] += int(ms.size)
                        by_rule[rule]["violations"] += int(np.sum(bq > 2 * ms + tol))
                if kind == "margin":
                    feasible["margin_feasible"] += 1
                    rep.record(np.full(ms.shape, bq), 2 * ms, tol,
                               where, "(iv) |b_Q| <= 2 M#(b chi_Q)")
                    continue
                if factor > 0:
                    feasible["generalized"] += 1
                    rep.record(np.full(ms.shape, factor * bq), ms, tol,
                               where, "(iv') 2t(1-t)|b_Q| <= M#(b chi_Q)")
                else:
                    feasible["no_superset"] += 1
                unscaled["checked_infeasible"] += int(ms.size)
                unscaled["violations_infeasible"] += int(np.sum(bq > 2 * ms + tol))

    rep.info["feasibility"] = feasibility
    rep.info["iv_by_rule"] = by_rule
    rep.info["iv_cases"] = feasible
    rep.info["iv_unscaled_on_infeasible"] = unscaled
    rep.info["halving_points"] = halving_points
    return rep


# -- mean split ----------------------------------------------------------------


def verify_mean_split(corpus, family: CubeFamily | None = None, members=None) -> VerificationReport:
    """int_E |b - b_Q| = int_F |b - b_Q| with E = {b <= b_Q}, F = {b > b_Q}."""
    grid = corpus.grid
    family = _family(grid, family)
    dv = grid.cell_volume
    if members is None:
        members = list(corpus.symbols) + list(corpus.functions)
    rep = VerificationReport("mean_split")
    for member in members:
        b = member.function
        for side in family.sides:
            mask = family.masks[side]
            w = _flat_windows(b.values, side)[mask]
            dev = w - w.mean(axis=-1, keepdims=True)
            low = dev <= 0
            e = np.where(low, -dev, 0.0).sum(axis=-1) * dv
            f = np.where(low, 0.0, dev).sum(axis=-1) * dv
            scale = np.abs(w).sum(axis=-1) * dv
            tol = CHAIN_TOL * np.maximum(e, f) + IDENTITY_TOL * scale
            rep.record(np.abs(e - f), 0.0, tol, {"b": member.name, "side": side}, "E/F split")
    return rep


# -- converse chain ------------------------------------------------------------


def _by_side(cubes):
    groups = {}
    for i, q in enumerate(cubes):
        groups.setdefault(q.side, []).append(i)
    return groups


def mb_indicator_on_cubes(b, cubes):
    """M_b(chi_Q) on Q's points for each Q.

    On Q this equals M_b(1) computed inside the crop of Q with every subcube:
    any cube R meeting Q at x can be replaced by a subcube of Q containing the
    box R cap Q, which is no larger than R.
    """
    out = [None] * len(cubes)
    d = b.grid.dim
    for side, idx in _by_side(cubes).items():
        masks = all_cube_masks((side,) * d)
        for chunk in _chunks(idx):
            bstack = np.stack([b.values[cubes[i].slices] for i in chunk])
            res = maximal_commutator_batch(bstack, np.ones_like(bstack), masks)
            for k, i in enumerate(chunk):
                out[i] = res[k]
    return out


def verify_converse_chain(corpus, exponents: Exponents, family: CubeFamily | None = None,
                          extra_q=(1.0, 1.5), weights=None) -> VerificationReport:
    """Per-cube links of the converse argument, each with 1e-10 relative slack.

    (a) mu(Q)^{-1-beta/n} int_Q |b - b_Q| <= mu(Q)^{-1-beta/n} int_Q M_b(chi_Q)
    (b) int_Q |b - b_Q| <= 2 int_Q |b - M_Q b|         (b >= 0; controls logged)
    (c) mu(Q)^{-1-beta/n} int_Q |b - M_Q b| <= maximal functional at exponent q

    (c) is run at the exponent q of ``exponents`` and at each of ``extra_q``.
    """
    grid = corpus.grid
    family = _family(grid, family)
    n, beta = grid.dim, exponents.beta
    dv = grid.cell_volume
    cubes = list(family)
    q_list = sorted({float(exponents.q), *map(float, extra_q)})
    weights = corpus.weights if weights is None else weights
    rep = VerificationReport("converse_chain")
    rep.info["q_values"] = q_list
    controls = {}
    for bm in corpus.symbols:
        b = bm.function
        mq_b = restricted_maxima(b, cubes)
        mbchi = mb_indicator_on_cubes(b, cubes)
        a_int = np.empty(len(cubes))
        d_int = np.empty(len(cubes))
        m_int = np.empty(len(cubes))
        scale = np.empty(len(cubes))
        for i, q in enumerate(cubes):
            box = b.values[q.slices]
            a_int[i] = np.abs(box - box.mean()).sum() * dv
            d_int[i] = np.abs(box - mq_b[i]).sum() * dv
            m_int[i] = mbchi[i].sum() * dv
            scale[i] = np.abs(box).sum() * dv
        floor = IDENTITY_TOL * scale
        # (b) involves no weight
        tol_b = CHAIN_TOL * np.maximum(a_int, 2 * d_int) + floor
        if bm.nonnegative:
            rep.record(a_int, 2 * d_int, tol_b, {"b": bm.name}, "(b)")
        else:
            controls[bm.name] = int(np.sum(a_int > 2 * d_int + tol_b))
        for w in weights:
            wname = w.generator
            mu_q = np.array([w.values[q.slices].sum() * dv for q in cubes])
            norm = mu_q ** (-1.0 - beta / n)
            where = {"b": bm.name, "mu": wname}
            lhs, rhs = norm * a_int, norm * m_int
            rep.record(lhs, rhs, CHAIN_TOL * np.maximum(lhs, rhs) + norm * floor, where, "(a)")
            profiles = _char_profiles("maximal_char", b, w, beta, q_list, family,
                                      lambda _cubes, mq_b=mq_b: mq_b)
            lhs = norm * d_int
            for qv in q_list:
                rhs = profiles[qv].values
                rep.record(lhs, rhs, CHAIN_TOL * np.maximum(lhs, rhs) + norm * floor,
                           dict(where, q=qv), "(c)")
    rep.info["control_violations_b"] = controls
    return rep


# -- Hoelder monotonicity --------------------------------------------------------


S_VALUES = (1.0, 1.5, 2.0, 3.0, 4.0)


def verify_holder_monotonicity(corpus, beta: float, family: CubeFamily | None = None,
                               s_values=S_VALUES, weights=None, functionals=("maximal", "sharp")
                               ) -> VerificationReport:
    """Per cube, value(s1) <= value(s2) (1 + 1e-9) for consecutive s1 < s2."""
    from ..lipschitz import sharp_of_restrictions

    grid = corpus.grid
    family = _family(grid, family)
    cubes = list(family)
    s_values = sorted(s_values)
    weights = corpus.weights if weights is None else weights
    rep = VerificationReport("holder_monotonicity")
    for bm in corpus.symbols:
        b = bm.function
        inner = {}
        if "maximal" in functionals:
            inner["maximal"] = restricted_maxima(b, cubes)
        if "sharp" in functionals:
            inner["sharp"] = [2.0 * v for v in sharp_of_restrictions(b, cubes)]
        for name, fields in inner.items():
            for w in weights:
                prof = _char_profiles(name + "_char", b, w, beta, s_values, family,
                                      lambda _cubes, fields=fields: fields)
                for s1, s2 in itertools.pairwise(s_values):
                    v1, v2 = prof[s1].values, prof[s2].values
                    rep.record(v1, v2 * (1 + MONOTONE_TOL), 0.0,
                               {"b": bm.name, "mu": w.generator, "functional": name,
                                "s1": s1, "s2": s2}, "monotone in s")
    return rep


# -- exact commutator identity -------------------------------------------------


def verify_commutator_identity(corpus, exponents: Exponents, family: CubeFamily | None = None,
                               weights=None) -> VerificationReport:
    """Per-cube maximal functional at exponent q equals
    mu(Q)^{-1/p} (int_Q |b M(chi_Q) - M(b chi_Q)|^q mu^{1-q})^{1/q},
    both global maximal functions over the all-family (b >= 0 members only).
    """
    grid = corpus.grid
    family = _family(grid, family)
    beta, p, q = exponents.beta, exponents.p, exponents.q
    dv = grid.cell_volume
    cubes = list(family)
    masks = all_cube_masks(grid.shape)
    weights = corpus.weights if weights is None else weights
    rep = VerificationReport("commutator_identity")
    m_ind = []
    for chunk in _chunks(cubes):
        res = hl_maximal_batch(_restrictions(np.ones(grid.shape), chunk), masks)
        m_ind.extend(res[k][c.slices] for k, c in enumerate(chunk))
    for bm in corpus.nonnegative_symbols():
        b = bm.function
        comm = []
        for chunk in _chunks(cubes):
            res = hl_maximal_batch(_restrictions(b.values, chunk), masks)
            for k, c in enumerate(chunk):
                comm.append(b.values[c.slices] * m_ind[len(comm)] - res[k][c.slices])
        for w in weights:
            prof = _char_profiles("maximal_char", b, w, beta, [q], family,
                                  lambda _c, b=b: restricted_maxima(b, _c))[q]
            rhs = np.empty(len(cubes))
            for i, c in enumerate(cubes):
                wq = w.values[c.slices]
                mq = wq.sum() * dv
                rhs[i] = mq ** (-1.0 / p) * (np.sum(np.abs(comm[i]) ** q * wq ** (1.0 - q)) * dv) ** (1.0 / q)
            lhs = prof.values
            rep.record(np.abs(lhs - rhs), 0.0, IDENTITY_TOL * np.maximum(lhs, rhs),
                       {"b": bm.name, "mu": w.generator}, "functional = commutator norm")
    rep.info["exponents"] = exponents.to_dict()
    return rep


# -- weights -------------------------------------------------------------------


def verify_a1_consistency(corpus, family: CubeFamily | None = None) -> VerificationReport:
    """Cube and pointwise A_1 forms agree to 1e-12; w(3Q)/w(Q) <= 3^n [w]_{A_1}."""
    grid = corpus.grid
    family = _family(grid, family)
    rep = VerificationReport("a1_consistency")
    constants = {}
    for w in corpus.weights:
        name = w.generator + _weight_tag(w)
        cube_form = a1_constant(w, family)
        point_form = a1_constant_pointwise(w, family)
        constants[name] = cube_form
        rep.record(abs(cube_form - point_form), 0.0, IDENTITY_TOL * cube_form,
                   {"weight": name}, "A1 cube = pointwise")
        bound = 3**grid.dim * cube_form * (1 + 1e-9)
        cubes = interior_cubes(family)
        ratios = np.array([doubling_ratio(w, c) for c in cubes])
        if ratios.size:
            rep.record(ratios, bound, 0.0, {"weight": name}, "doubling")
    rep.info["a1_constants"] = constants
    return rep


# -- empirical constants ---------------------------------------------------------


def _lemma_inputs(corpus, continuum_only):
    functions = corpus.continuum_functions() if continuum_only else list(corpus.functions)
    symbols = [m for m in corpus.nonnegative_symbols() if m.lipschitz]
    return functions, symbols


def verify_lemma21(corpus, beta: float, family: CubeFamily | None = None,
                   p_list=(1.0, 2.0, 4.0), continuum_only: bool = False) -> VerificationReport:
    """Pointwise Lipschitz constants and the norm-equivalence ratio K across p."""
    family = _family(corpus.grid, family)
    _, symbols = _lemma_inputs(corpus, continuum_only)
    rep = VerificationReport("lemma21")
    sups, ks = [], []
    for bm in symbols:
        for w in corpus.weights:
            c = pointwise_lip_constant(bm.function, w, beta, family)
            k = equivalence_ratio(lip_norm_equivalence_table(bm.function, w, beta, family, p_list))
            _finite(rep, [c, k], "finite", b=bm.name, mu=w.generator)
            sups.append(c)
            ks.append(k)
    rep.info["sup"] = max(sups) if sups else 0.0
    rep.info["equivalence_K"] = max(ks) if ks else 1.0
    return rep


def verify_lemma22(corpus, beta: float, family: CubeFamily | None = None,
                   continuum_only: bool = False) -> VerificationReport:
    """max |b(x) - b_Q| / (||b|| w(Q)^{beta/n} w(x)) over the corpus."""
    family = _family(corpus.grid, family)
    _, symbols = _lemma_inputs(corpus, continuum_only)
    rep = VerificationReport("lemma22")
    best = 0.0
    for bm in symbols:
        for w in corpus.weights:
            c = oscillation_bound_constant(bm.function, w, beta, family)
            _finite(rep, c, "finite", b=bm.name, mu=w.generator)
            best = max(best, c)
    rep.info["sup"] = best
    return rep


def _window_min(values, side):
    d = values.ndim
    return sliding_window_view(values, (side,) * d).min(axis=tuple(range(d, 2 * d)))


def _window_count(flags, side):
    d = flags.ndim
    return sliding_window_view(flags, (side,) * d).sum(axis=tuple(range(d, 2 * d)))


def _default_r(r):
    return 2.0 if r is None else float(r)


def verify_lemma24_domination(corpus, beta: float, r: float | None = None,
                              family: CubeFamily | None = None,
                              continuum_only: bool = False) -> VerificationReport:
    """max over (x, f, b, w) of M_b f(x) / (||b|| w(x) M_{beta,w,r} f(x))."""
    r = _default_r(r)
    if not r > 1:
        raise ValueError(f"r must exceed 1, got {r}")
    family = _family(corpus.grid, family)
    functions, symbols = _lemma_inputs(corpus, continuum_only)
    rep = VerificationReport("lemma24")
    frac = {(i, j): weighted_fractional_maximal(fm.function, w, beta, r, family).array
            for i, fm in enumerate(functions) for j, w in enumerate(corpus.weights)}
    best, skipped, total = 0.0, 0, 0
    for bm in symbols:
        norms = [lip_norm(bm.function, w, beta, 1, family).value for w in corpus.weights]
        for i, fm in enumerate(functions):
            mb = maximal_commutator(bm.function, fm.function, family).array
            for j, w in enumerate(corpus.weights):
                den = norms[j] * w.values * frac[(i, j)]
                ok = den > 0
                total += den.size
                skipped += int((~ok).sum())
                ratio = np.divide(mb, den, out=np.zeros_like(mb), where=ok)
                _finite(rep, ratio.max(), "finite", b=bm.name, f=fm.name, mu=w.generator)
                best = max(best, float(ratio.max()))
    _bound_skips(rep, skipped, total)
    rep.info["sup"] = best
    rep.info["r"] = r
    return rep


def verify_lemma25_ratios(corpus, beta: float, r: float | None = None,
                          family: CubeFamily | None = None,
                          continuum_only: bool = False) -> VerificationReport:
    """Sup ratios of the two averaged inequalities, over Q, x in Q, f, b, w.

    first:  mean_Q |f| / (w(Q)^{-beta/n} M_{beta,w,r} f(x))
    second: mean_Q |b - b_Q||f| / (||b|| M(w)(x) M_{beta,w,r} f(x))
    """
    r = _default_r(r)
    if not r > 1:
        raise ValueError(f"r must exceed 1, got {r}")
    grid = corpus.grid
    family = _family(grid, family)
    n, d = grid.dim, grid.dim
    functions, symbols = _lemma_inputs(corpus, continuum_only)
    rep = VerificationReport("lemma25")
    best1 = best2 = 0.0
    skipped = total = 0
    for w in corpus.weights:
        mw = hl_maximal(w.base, family).array
        norms = {bm.name: lip_norm(bm.function, w, beta, 1, family).value for bm in symbols}
        for fm in functions:
            fv = np.abs(fm.function.values)
            frac = weighted_fractional_maximal(fm.function, w, beta, r, family).array
            for side in family.sides:
                mask = family.masks[side]
                npts = side**d
                zero = frac == 0
                cnt_zero = _window_count(zero, side)[mask]
                den = _window_min(np.where(zero, np.inf, frac), side)[mask]
                total += mask.sum() * npts
                skipped += int(cnt_zero.sum())
                num1 = _flat_windows(fv, side)[mask].mean(axis=-1)
                wq = w.measures(side)[mask]
                r1 = np.where(np.isfinite(den), num1 / (wq ** (-beta / n) * den), 0.0)
                _finite(rep, r1, "first finite", f=fm.name, mu=w.generator, side=side)
                best1 = max(best1, float(r1.max()))
                for bm in symbols:
                    total += mask.sum() * npts
                    if norms[bm.name] == 0:
                        skipped += int(mask.sum() * npts)
                        continue
                    skipped += int(cnt_zero.sum())
                    wb = _flat_windows(bm.function.values, side)[mask]
                    dev = np.abs(wb - wb.mean(axis=-1, keepdims=True))
                    num2 = (dev * _flat_windows(fv, side)[mask]).mean(axis=-1)
                    prod = np.where(zero, np.inf, mw * frac)
                    den2 = norms[bm.name] * _window_min(prod, side)[mask]
                    r2 = np.where(np.isfinite(den2), num2 / den2, 0.0)
                    _finite(rep, r2, "second finite", b=bm.name, f=fm.name, mu=w.generator)
                    best2 = max(best2, float(r2.max()))
    _bound_skips(rep, skipped, total)
    rep.info["sup_first"] = best1
    rep.info["sup_second"] = best2
    rep.info["sup"] = max(best1, best2)
    rep.info["r"] = r
    return rep


def stability_factor(a: float, b: float) -> float:
    """max(a/b, b/a); 1 when both vanish, inf when exactly one does."""
    if a == 0 and b == 0:
        return 1.0
    if a == 0 or b == 0:
        return math.inf
    return max(a / b, b / a)
