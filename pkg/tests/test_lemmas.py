from fractions import Fraction

import pytest
from hypothesis import assume, given

from conftest import comm_instances
from partbound import comm, instances, lemmas, suites
from partbound.core import CommInstance, Distribution, InputError

EQ4 = instances.make_standard("EQ_4")
XOR = CommInstance.from_rows([[0, 1], [1, 0]])


def test_recsim1_on_equality():
    r = lemmas.lemma_transform("recsim1", EQ4, Fraction(1, 4), 1)
    assert r.holds
    assert r.checks[0].lhs == Fraction(1, 2)
    assert r.constructed["rec"] == comm.compute_comm_bound(EQ4, "rec", Fraction(1, 4), 1).value


def test_recgeqdisc_on_xor_uniform():
    r = lemmas.lemma_transform("recgeqdisc", XOR, Fraction(1, 4), 1, lam=Distribution.uniform(XOR.defined()))
    assert r.holds
    assert r.constructed["disc_lambda"] == 4
    assert r.checks[0].rhs == Fraction(1, 2)


def test_sdisceq2_on_constant_function():
    c = CommInstance.from_rows([[1, 1], [1, 1]])
    r = lemmas.lemma_transform("sdisceq2", c, Fraction(1, 8), lam=Distribution.uniform(c.defined()), g=c)
    assert r.holds
    assert r.constructed["disc_lambda_g"] == 1


def test_srecsim2_with_a_flipped_cell():
    g = CommInstance.from_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    mass = {i: (Fraction(1, 6) if g.cells[i] == 1 else Fraction(1, 16) if EQ4.cells[i] == 1 else Fraction(7, 192))
            for i in EQ4.defined()}
    lam = Distribution(mass)
    assert lam.total(EQ4.defined()) == 1
    r = lemmas.lemma_transform("srecsim2", EQ4, Fraction(1, 8), 1, lam=lam, g=g)
    assert r.holds
    assert r.constructed["flip_mass"] == Fraction(1, 16)
    assert r.constructed["srec"] == Fraction(11, 4)
    # the constructed dual alone falls short of the target on this instance
    assert r.flagged == [r.checks[2].name]


def test_srecsim2_hypotheses_are_enforced():
    lam = Distribution.uniform(EQ4.defined())
    with pytest.raises(InputError, match="1/2"):
        lemmas.lemma_transform("srecsim2", EQ4, Fraction(1, 8), 1, lam=lam)
    g = CommInstance.from_rows([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    with pytest.raises(InputError, match="only differ"):
        lemmas.lemma_transform("srecsim2", EQ4, Fraction(1, 8), 1, lam=suites.lemma_inputs(EQ4, 1), g=g)


@pytest.mark.parametrize("args, match", [
    (("recsim1", EQ4, 0, 1), "epsilon"),
    (("recsim1", EQ4, Fraction(1, 8), None), "target"),
    (("nope", EQ4, Fraction(1, 8), 1), "unknown direction"),
    (("recsim2", EQ4, Fraction(1, 8), 1), "distribution"),
])
def test_lemma_input_errors(args, match):
    with pytest.raises(InputError, match=match):
        lemmas.lemma_transform(*args)


def test_lemma_suite_holds_on_seeded_corpus():
    rep = suites.lemma_suite(7, 10)
    assert rep.passed and len(rep.cases) == 120


@given(comm_instances(max_side=3, partial=False))
def test_every_direction_holds_on_random_functions(f):
    assume(f.preimage(0) and f.preimage(1))
    eps = Fraction(1, 8)
    for z in (0, 1):
        lam = suites.lemma_inputs(f, z)
        for d in ("recsim1", "recsim2", "srecsim1", "srecsim2", "recgeqdisc"):
            try:
                r = lemmas.lemma_transform(d, f, eps, z, lam=lam)
            except InputError:
                continue
            assert r.holds, (d, z, [(c.name, c.lhs, c.rhs) for c in r.checks])
    uni = Distribution.uniform(f.defined())
    for d in ("sdisceq1", "sdisceq2"):
        try:
            r = lemmas.lemma_transform(d, f, eps, lam=uni)
        except InputError:
            continue
        assert r.holds, d
