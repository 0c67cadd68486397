
import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochbayes.bayes import (FusionInstance, InferenceInstance, ONE_PARENT_ONE_CHILD,
                              ONE_PARENT_TWO_CHILD, TWO_PARENT_ONE_CHILD, bayes_posterior,
                              fuse, fusion_posterior, infer, structure_eval)
from stochbayes.errors import DegenerateFusionError, DivisionUndefinedError, InvalidInputError

p01 = st.floats(0.05, 0.95)


def test_posterior_oracle():
    assert bayes_posterior(0.57, 0.72, 0.6) == pytest.approx(0.4104 / 0.6684)
    assert round(bayes_posterior(0.57, 0.72, 0.6), 4) == 0.6140


def test_posterior_zero_denominator():
    with pytest.raises(DivisionUndefinedError):
        bayes_posterior(0.5, 0.0, 0.0)


def test_fusion_oracle_values():
    assert fusion_posterior([0.8, 0.6]) == pytest.approx(0.48 / 0.56)
    assert fusion_posterior([0.8, 0.6, 0.7]) == pytest.approx(0.336 / 0.36)


def test_fusion_degenerate():
    with pytest.raises(DegenerateFusionError):
        fusion_posterior([1.0, 0.0])


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        FusionInstance((0.5,))
    with pytest.raises(InvalidInputError):
        FusionInstance((0.5, 0.5), prior=1.0)
    with pytest.raises(InvalidInputError):
        InferenceInstance(1.2, 0.5, 0.5)


@given(p01, p01, p01, p01)
def test_posterior_monotone_in_prior(a1, a2, l, ln):
    if l <= ln:
        return
    lo, hi = sorted((a1, a2))
    assert bayes_posterior(lo, l, ln) <= bayes_posterior(hi, l, ln) + 1e-12


@given(st.lists(p01, min_size=2, max_size=4), st.randoms(use_true_random=False))
def test_fusion_permutation_invariant(ps, rnd):
    qs = list(ps)
    rnd.shuffle(qs)
    assert fusion_posterior(ps) == pytest.approx(fusion_posterior(qs))


@given(st.lists(p01, min_size=1, max_size=3))
def test_uninformative_identity(ps):
    if len(ps) == 1:
        assert fusion_posterior(ps + [0.5]) == pytest.approx(ps[0])
    else:
        assert fusion_posterior(ps + [0.5]) == pytest.approx(fusion_posterior(ps))


def test_infer_long_run_and_latency():
    rep = infer(InferenceInstance(0.57, 0.72, 0.6), 100_000, seed=1)
    assert rep.posterior == pytest.approx(0.6140, abs=0.02)
    assert rep.simulated_latency == pytest.approx(0.4, rel=1e-12)
    rep100 = infer(InferenceInstance(0.57, 0.72, 0.6), 100, seed=1)
    assert rep100.simulated_latency == pytest.approx(4e-4, rel=1e-12)


def test_infer_numerator_subset_of_denominator():
    for seed in range(20):
        run = infer(InferenceInstance(0.3, 0.8, 0.4), 200, seed, correlations=False).run
        assert not np.any(run.streams["num"].bits & ~run.streams["B"].bits)


def test_infer_correlation_pattern():
    rep = infer(InferenceInstance(0.57, 0.72, 0.6), 100_000, seed=2)
    m = {(e.x, e.y): e.scc for e in rep.correlation_matrix}
    assert m[("B|A", "B|~A")] == pytest.approx(1.0)
    assert m[("num", "B")] == pytest.approx(1.0)
    assert abs(m[("A", "B|A")]) < 0.05 and abs(m[("A", "B|~A")]) < 0.05


def test_infer_seed_determinism():
    inst = InferenceInstance(0.4, 0.7, 0.2)
    assert infer(inst, 500, 3).stream == infer(inst, 500, 3).stream


def test_infer_record_shape():
    rec = infer(InferenceInstance(0.4, 0.7, 0.2), 100, 3).record()
    assert set(rec) >= {"instance", "analytic", "simulated", "error", "bits", "seed",
                        "simulated_latency", "correlation"}


@pytest.mark.parametrize("ps, prior", [((0.8, 0.6), 0.5), ((0.8, 0.6, 0.7), 0.5),
                                       ((0.7, 0.9), 0.3), ((0.2, 0.3, 0.9), 0.6)])
def test_fuse_long_run(ps, prior):
    inst = FusionInstance(ps, prior)
    rep = fuse(inst, 100_000, seed=4)
    assert rep.posterior == pytest.approx(inst.analytic(), abs=0.02)


def test_fuse_permutation_simulated():
    a = fuse(FusionInstance((0.8, 0.3, 0.6)), 100_000, seed=5).posterior
    b = fuse(FusionInstance((0.6, 0.8, 0.3)), 100_000, seed=6).posterior
    assert a == pytest.approx(b, abs=0.02)


def test_fuse_degenerate_raises():
    with pytest.raises(DegenerateFusionError):
        fuse(FusionInstance((1.0, 0.0)), 100)


def test_two_parent_marginal():
    out = structure_eval(TWO_PARENT_ONE_CHILD, {"priors": (0.5, 0.5),
                                                "child": (0.1, 0.2, 0.3, 0.4)},
                         100_000, seed=1)
    assert out["analytic"]["P(B)"] == pytest.approx(0.25)
    assert out["simulated"]["P(B)"] == pytest.approx(0.25, abs=0.005)
    assert out["netlist"].kind_counts().get("MUX4") == 1


def test_one_parent_two_child_marginals():
    out = structure_eval(ONE_PARENT_TWO_CHILD, {"prior": 0.5,
                                                "children": ((0.1, 0.9), (0.2, 0.8))},
                         100_000, seed=1)
    assert out["simulated"]["P(B1)"] == pytest.approx(0.5, abs=0.005)
    assert out["simulated"]["P(B2)"] == pytest.approx(0.5, abs=0.005)


def test_one_parent_one_child_matches_infer():
    out = structure_eval(ONE_PARENT_ONE_CHILD, {"prior": 0.57, "child": (0.6, 0.72)},
                         5000, seed=9)
    rep = infer(InferenceInstance(0.57, 0.72, 0.6), 5000, seed=9)
    assert out["simulated"]["P(A|B)"] == pytest.approx(rep.posterior, abs=1e-12)


def test_structure_extension_posteriors():
    out = structure_eval(TWO_PARENT_ONE_CHILD, {"priors": (0.3, 0.6),
                                                "child": (0.1, 0.5, 0.4, 0.9)},
                         100_000, seed=2)
    for key in ("P(A1|B)", "P(A2|B)"):
        assert out["simulated"][key] == pytest.approx(out["analytic"][key], abs=0.02)


def test_bad_tables():
    with pytest.raises(InvalidInputError):
        structure_eval(TWO_PARENT_ONE_CHILD, {"priors": (0.5,)}, 100)
