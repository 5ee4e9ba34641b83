import numpy as np
import oracles
import pytest

from maxcomm import (
    Cube,
    CubeFamily,
    Exponents,
    Grid,
    GridFunction,
    Weight,
    maximal_commutator,
    uniform_weight,
    unit_grid,
)
from maxcomm.lipschitz import sharp_of_restriction
from maxcomm.verification import (
    Corpus,
    Member,
    SuiteError,
    VerificationReport,
    build_corpus,
    dual_power_norm,
    estimate_operator_norm,
    merge,
    verify_a1_consistency,
    verify_commutator_identity,
    verify_converse_chain,
    verify_holder_monotonicity,
    verify_lemma21,
    verify_lemma22,
    verify_lemma24_domination,
    verify_lemma25_ratios,
    verify_mean_split,
    verify_pointwise_domination,
    verify_restriction_identities,
    weighted_lp_norm,
)
from maxcomm.verification.suites import (
    best_superset_factor,
    margin_feasible,
    mb_indicator_on_cubes,
    sharp_indicator_closed_form,
    stability_factor,
)

EXPONENTS = Exponents(2.0, 0.25, 1)


@pytest.fixture(scope="module")
def corpus1d():
    return build_corpus(3, unit_grid(1, 12), sizes=(8, 6, 5))


@pytest.fixture(scope="module")
def corpus2d():
    return build_corpus(3, unit_grid(2, 5), sizes=(4, 6, 3))


def single(grid, b, name="b", nonnegative=True, functions=None):
    member = Member(name, GridFunction(grid, b), nonnegative)
    functions = functions or [Member("one", GridFunction(grid, np.ones(grid.shape)), True)]
    return Corpus(0, grid, functions, [member], [uniform_weight(grid)])


def test_corpus_is_deterministic():
    grid = unit_grid(2, 6)
    a, b = build_corpus(11, grid), build_corpus(11, grid)
    assert a.names() == b.names()
    for xs, ys in [(a.functions, b.functions), (a.symbols, b.symbols)]:
        assert all(np.array_equal(x.values, y.values) for x, y in zip(xs, ys))
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.weights, b.weights))
    c = build_corpus(12, grid)
    assert not np.array_equal(a.functions[0].values, c.functions[0].values) or \
        not np.array_equal(a.symbols[2].values, c.symbols[2].values)


def test_corpus_composition():
    corpus = build_corpus(0, unit_grid(1, 16), sizes=(8, 6, 5))
    names = corpus.names()
    assert len(names["functions"]) == 8 and len(names["symbols"]) == 6
    assert len(names["weights"]) == 5
    assert all(np.all(m.values >= 0) for m in corpus.nonnegative_symbols())
    assert any(np.any(m.values < 0) for m in corpus.controls())
    assert [m.name for m in corpus.symbols if not m.lipschitz] == ["log_control"]
    small = build_corpus(0, unit_grid(1, 16))
    assert np.array_equal(small.functions[0].values, corpus.functions[0].values)


def test_weighted_lp_norm_examples():
    grid = Grid(1, (4,))
    one = GridFunction(grid, np.ones(4))
    assert weighted_lp_norm(one, 2, uniform_weight(grid)) == 2.0
    assert weighted_lp_norm(GridFunction(grid, np.zeros(4)), 3, uniform_weight(grid)) == 0.0
    rng = np.random.default_rng(0)
    g2 = Grid(2, (3, 5), spacing=0.5)
    f = GridFunction(g2, rng.standard_normal((3, 5)))
    w = Weight(GridFunction(g2, rng.random((3, 5)) + 0.1))
    direct = (np.sum(np.abs(f.values) ** 3 * w.values) * 0.25) ** (1 / 3)
    assert weighted_lp_norm(f, 3, w) == pytest.approx(direct, rel=1e-14)
    dual = (np.sum(np.abs(f.values) ** 4 * w.values ** -3) * 0.25) ** 0.25
    assert dual_power_norm(f, 4, w) == pytest.approx(dual, rel=1e-14)
    with pytest.raises(ValueError):
        weighted_lp_norm(f, 0.5, w)


@pytest.mark.parametrize("op", ["Mb", "bM", "bMsharp"])
def test_norm_estimate_vanishes_for_constant_symbol(op):
    corpus = build_corpus(0, unit_grid(1, 16))
    b = GridFunction(corpus.grid, np.full(16, 2.0))
    est = estimate_operator_norm(op, corpus, EXPONENTS, uniform_weight(corpus.grid), b)
    assert est.sup_ratio == pytest.approx(0.0, abs=1e-14)
    assert est.n_samples == len(corpus.functions)


def test_norm_estimates_respect_pointwise_domination():
    corpus = build_corpus(1, unit_grid(1, 24))
    mu = uniform_weight(corpus.grid)
    for bm in corpus.nonnegative_symbols():
        for fm in corpus.functions:
            ests = {op: estimate_operator_norm(op, [fm], EXPONENTS, mu, bm.function)
                    for op in ("Mb", "bM", "bMsharp")}
            mb = ests["Mb"].sup_ratio
            assert ests["bM"].sup_ratio <= mb * (1 + 1e-12) + 1e-14
            assert ests["bMsharp"].sup_ratio <= 2 * mb * (1 + 1e-12) + 1e-14


def test_norm_estimate_bookkeeping():
    grid = unit_grid(1, 8)
    mu = uniform_weight(grid)
    zero = GridFunction(grid, np.zeros(8))
    one = GridFunction(grid, np.ones(8))
    est = estimate_operator_norm("frac", [zero, one], EXPONENTS, mu)
    assert est.n_skipped == 1 and est.n_samples == 1 and est.witness == "f1"
    assert est.exponents["r"] == 1.5
    expected = weighted_lp_norm(GridFunction(grid, oracles.frac(np.ones(8), np.ones(8), 0.25, 1.5,
                                                                grid.spacing)), 4, mu)
    assert est.sup_ratio == pytest.approx(expected / weighted_lp_norm(one, 2, mu), rel=1e-12)
    with pytest.raises(ValueError):
        estimate_operator_norm("Mb", [one], EXPONENTS, mu)
    with pytest.raises(ValueError):
        estimate_operator_norm("frac", [], EXPONENTS, mu)
    with pytest.raises(ValueError):
        estimate_operator_norm("T", [one], EXPONENTS, mu)


def test_report_records_and_merges():
    rep = VerificationReport("a")
    rep.record([1.0, 2.0, 3.0], 2.0, 0.0, {"k": 1}, "le")
    assert rep.cases == 3 and rep.n_failures == 1 and not rep.passed
    assert rep.failures[0]["lhs"] == 3.0 and rep.worst_slack == -1.0
    rep.record(np.nan, 0.0, 0.0, None, "nan")
    assert rep.n_failures == 2
    ok = VerificationReport("b")
    ok.record(0.0, 0.0, 0.0)
    both = merge("all", [rep, ok])
    assert both.cases == 5 and both.n_failures == 2
    assert stability_factor(2.0, 1.0) == 2.0 and stability_factor(0, 0) == 1.0
    assert stability_factor(0, 1) == np.inf


def test_pointwise_domination(corpus1d, corpus2d):
    for corpus in (corpus1d, corpus2d):
        rep = verify_pointwise_domination(corpus)
        assert rep.passed, rep.failures[:3]
        assert rep.cases > 0


def test_pointwise_domination_logs_control_violations():
    # b = -1: [b,M]f = -2 M f while M_b f = 0
    grid = Grid(1, (8,))
    f = Member("spike", GridFunction(grid, [0, 0, 0, 1.0, 0, 0, 0, 0]), True)
    rep = verify_pointwise_domination(single(grid, np.full(8, -1.0), "negative", False, [f]))
    assert rep.passed and rep.cases == 0
    assert rep.info["control_total"] > 0


def test_zero_symbol_domination_is_tight():
    grid = Grid(2, (4, 4))
    rep = verify_pointwise_domination(single(grid, np.zeros((4, 4))))
    assert rep.passed and rep.worst_slack == pytest.approx(1e-12)


def test_restriction_identities(corpus1d, corpus2d):
    for corpus in (corpus1d, corpus2d):
        rep = verify_restriction_identities(corpus)
        assert rep.passed, rep.failures[:3]
        assert rep.info["halving_points"] > 0


def test_halving_interval_example():
    grid = Grid(1, (8,))
    q = Cube((2,), 4)
    values, halving = sharp_indicator_closed_form([q], grid.shape)
    assert np.all(halving[0][q.slices])
    assert np.allclose(values[0][q.slices], 0.5, rtol=0, atol=1e-15)
    assert margin_feasible(q, grid.shape, 1)
    direct = oracles.sharp(oracles.restrict(np.ones(8), (2,), 4))
    assert np.allclose(values[0], direct, rtol=0, atol=1e-14)


def test_constant_on_cube_mean_bound():
    grid = Grid(1, (10,))
    q = Cube((3,), 3)
    b = np.full(10, 1.6)
    ms = sharp_of_restriction(GridFunction(grid, b), q)
    assert np.all(1.6 <= 2 * ms + 1e-12)
    assert np.allclose(ms, 0.8, rtol=1e-14)


def test_unscaled_mean_bound_fails_without_double_measure_superset():
    # 2x2 corner cube of a 6x6 grid: every cube containing the corner point is
    # anchored there, and |R| = 8 is not a square, so no R halves Q
    grid = Grid(2, (6, 6))
    q = Cube((0, 0), 2)
    assert not margin_feasible(q, grid.shape, 2)
    assert best_superset_factor(q, grid.shape, 2) == pytest.approx(40 / 81, rel=1e-15)
    ms = sharp_of_restriction(GridFunction(grid, np.ones((6, 6))), q)
    assert ms[0, 0] == pytest.approx(40 / 81, rel=1e-14)
    assert 1.0 > 2 * ms[0, 0]
    assert best_superset_factor(q, grid.shape, 2) * 1.0 <= ms[0, 0] + 1e-15


def test_margin_feasibility_by_dimension():
    assert margin_feasible(Cube((0,), 3), (6,), 1)
    assert not margin_feasible(Cube((0,), 4), (6,), 1)
    assert not any(margin_feasible(Cube((0, 0), s), (16, 16), 2) for s in range(1, 17))


def test_mb_indicator_crop_identity():
    rng = np.random.default_rng(9)
    grid = Grid(2, (5, 5))
    b = GridFunction(grid, rng.random((5, 5)))
    fam = CubeFamily(grid)
    cubes = [Cube((0, 0), 2), Cube((1, 2), 3), Cube((0, 0), 5)]
    got = mb_indicator_on_cubes(b, cubes)
    for q, vals in zip(cubes, got):
        ind = np.zeros((5, 5))
        ind[q.slices] = 1
        full = maximal_commutator(b, GridFunction(grid, ind), fam).array
        assert np.allclose(vals, full[q.slices], rtol=1e-13)


def test_mean_split(corpus1d, corpus2d):
    grid = Grid(1, (2,))
    rep = verify_mean_split(single(grid, [0.0, 2.0]))
    assert rep.passed and rep.cases == 6  # symbol and function, three intervals each
    for corpus in (corpus1d, corpus2d):
        assert verify_mean_split(corpus).passed


def test_converse_chain(corpus1d, corpus2d):
    for corpus in (corpus1d, corpus2d):
        exps = Exponents(2.0, 0.25, corpus.grid.dim)
        rep = verify_converse_chain(corpus, exps)
        assert rep.passed, rep.failures[:3]
        assert exps.q in rep.info["q_values"]


def test_converse_chain_constant_and_ramp():
    grid = unit_grid(1, 16)
    assert verify_converse_chain(single(grid, np.full(16, 3.0)), EXPONENTS).passed
    assert verify_converse_chain(single(grid, np.linspace(0, 1, 16)), EXPONENTS).passed


def test_holder_monotonicity(corpus1d, corpus2d):
    for corpus in (corpus1d, corpus2d):
        assert verify_holder_monotonicity(corpus, 0.25).passed


def test_commutator_identity(corpus1d):
    rep = verify_commutator_identity(corpus1d, EXPONENTS)
    assert rep.passed, rep.failures[:3]
    assert rep.cases == len(CubeFamily(corpus1d.grid)) * len(corpus1d.nonnegative_symbols()) * 5


def test_a1_consistency(corpus1d, corpus2d):
    for corpus in (corpus1d, corpus2d):
        rep = verify_a1_consistency(corpus)
        assert rep.passed
        assert rep.info["a1_constants"]["uniform"] == 1.0


def test_lemma_suites_report_finite_constants(corpus1d):
    for rep in (verify_lemma21(corpus1d, 0.25), verify_lemma22(corpus1d, 0.25),
                verify_lemma24_domination(corpus1d, 0.25),
                verify_lemma25_ratios(corpus1d, 0.25)):
        assert rep.passed
        assert 0 < rep.info["sup"] < np.inf
    assert verify_lemma21(corpus1d, 0.25).info["equivalence_K"] <= 10


def test_lemma24_invariant_under_scaling_f():
    grid = unit_grid(1, 16)
    x = np.linspace(0, 1, 16)
    bump = np.exp(-((x - 0.5) ** 2) / 0.02)

    def run(c):
        f = Member("bump", GridFunction(grid, c * bump), True)
        return verify_lemma24_domination(single(grid, x, "ramp", True, [f]), 0.25).info["sup"]

    assert run(3.5) == pytest.approx(run(1.0), rel=1e-12)


def test_lemma_suites_reject_all_skipped_terms():
    grid = unit_grid(1, 8)
    corpus = single(grid, np.full(8, 1.0), "flat")
    with pytest.raises(SuiteError):
        verify_lemma24_domination(corpus, 0.25)
    with pytest.raises(ValueError):
        verify_lemma24_domination(corpus, 0.25, r=1.0)
