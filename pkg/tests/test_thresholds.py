from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from achievement import (
    BUILTINS,
    CapExceededError,
    Coefficients,
    DomainError,
    Label,
    PowerEnvelope,
    ap_search,
    cantorval_necessary_check,
    classify,
    compute_thresholds,
    residue_certificate,
    subsum_alphabet,
)
from achievement.thresholds import SubsumAlphabet, rth_root

from oracles import longest_ap_bruteforce

ID = BUILTINS["identity"]
UNIT = PowerEnvelope(1, 1, 1)


def exact(*k):
    return Coefficients(tuple(F(v) for v in k))


class TestAlphabet:
    @pytest.mark.parametrize(
        "k, expected",
        [
            ((3, 2), [0, 2, 3, 5]),
            ((1,), [0, 1]),
            ((4, 3, 2, 2), [0, 2, 3, 4, 5, 6, 7, 8, 9, 11]),
        ],
    )
    def test_examples(self, k, expected):
        assert list(subsum_alphabet(exact(*k)).values) == expected

    def test_symmetric_and_bounded(self):
        c = exact(7, 5, 5, 3, 1)
        vals = subsum_alphabet(c).values
        assert set(vals) == {c.K - v for v in vals}
        assert len(vals) <= 2**c.m

    def test_float_dedup(self):
        c = Coefficients((0.3, 0.2, 0.1))
        vals = subsum_alphabet(c).values
        # 0.1 + 0.2 and 0.3 collide up to rounding
        assert len(vals) == 7
        assert vals[-1] == pytest.approx(0.6)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            subsum_alphabet(Coefficients((1,) * 5), cap=4)


class TestAPSearch:
    def test_examples(self):
        ap = ap_search(SubsumAlphabet((0, 2, 3, 4, 5, 6, 7, 8, 9, 11)))
        assert (ap.mu, ap.lam, ap.s) == (2, 1, 7)
        ap = ap_search(SubsumAlphabet((0, 2, 3, 5)), allow_mu_zero=False)
        assert (ap.mu, ap.lam, ap.s) == (2, 1, 1)
        assert not ap.mu_zero_allowed
        ap = ap_search(SubsumAlphabet((0, 1)))
        assert (ap.mu, ap.lam, ap.s) == (0, 1, 1)

    def test_members_in_alphabet(self):
        alpha = subsum_alphabet(exact(5, 4, 3, 3, 1))
        ap = ap_search(alpha)
        assert all(v in alpha for v in ap.members())

    def test_single_point(self):
        ap = ap_search(SubsumAlphabet((0, 4)), allow_mu_zero=False)
        assert ap.s == 0 and ap.lam > 0

    def test_empty(self):
        with pytest.raises(DomainError):
            ap_search(SubsumAlphabet(()))

    def test_float_alphabet(self):
        ap = ap_search(subsum_alphabet(Coefficients((0.4, 0.3, 0.2, 0.2))))
        assert ap.s == 7
        assert ap.lam == pytest.approx(0.1)

    def test_size_cap(self):
        with pytest.raises(CapExceededError):
            ap_search(SubsumAlphabet(tuple(range(20))), cap_bits=4)


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.integers(0, 60), min_size=1, max_size=64, unique=True),
    st.booleans(),
)
def test_ap_search_matches_bruteforce(values, allow_zero):
    values = sorted(values)
    if not allow_zero and values == [0]:
        return
    ap = ap_search(SubsumAlphabet(tuple(values)), allow_mu_zero=allow_zero)
    s, lam, mu = longest_ap_bruteforce(values, allow_zero)
    assert ap.s == s
    if s > 0:
        assert (ap.lam, ap.mu) == (lam, mu)


class TestComputeThresholds:
    def test_guthrie_nymann(self):
        th = compute_thresholds(exact(3, 2), UNIT)
        assert (th.d_I, th.d_NI, th.d_C, th.d_IM) == (F(2, 7), F(2, 7), F(1, 6), F(1, 2))
        assert all(isinstance(d, F) for d in (th.d_I, th.d_NI, th.d_C, th.d_IM))
        assert th.cantorval_window is None

    def test_four_coefficients(self):
        th = compute_thresholds(exact(4, 3, 2, 2), UNIT)
        assert (th.d_I, th.d_NI, th.d_C, th.d_CI) == (F(2, 13), F(2, 13), 0, F(1, 8))
        assert (th.ap.mu, th.ap.lam, th.ap.s) == (2, 1, 7)
        assert th.cantorval_window == (F(1, 8), F(2, 13))

    def test_single_coefficient(self):
        th = compute_thresholds(exact(1), UNIT)
        assert th.d_I == th.d_IM == th.d_NI == th.d_C == F(1, 2)

    def test_float_inputs_give_floats(self):
        th = compute_thresholds(Coefficients((4.0, 3.0, 2.0, 2.0)), ID)
        assert isinstance(th.d_I, float) and isinstance(th.d_CI, float)
        assert th.d_CI == 0.125
        assert th.d_NI == pytest.approx(2 / 13, rel=1e-15)

    def test_exact_root(self):
        th = compute_thresholds(exact(1), PowerEnvelope(F(1, 2), F(1, 2), 2))
        assert th.d_IM == rth_root(F(1, 2), 2)
        assert rth_root(F(4, 9), 2) == F(2, 3)

    def test_envelope_d_im(self):
        th = compute_thresholds(Coefficients((1.0,)), PowerEnvelope(0.5403, 1, 1))
        assert th.d_IM == pytest.approx(1 / 1.5403)

    def test_mu_zero_recovers_coarse_threshold(self):
        th = compute_thresholds(exact(3, 2), UNIT, allow_mu_zero=True)
        assert th.ap.s >= 1
        forced = compute_thresholds(exact(1), UNIT)
        # s = 1, mu = 0, lambda = K: d_CI coincides with d_IM
        assert forced.d_CI == forced.d_IM

    def test_alphabet_cap_skips_progression(self):
        th = compute_thresholds(Coefficients((1,) * 6), UNIT, alphabet_cap=4)
        assert th.d_CI is None and th.ap is None and th.cantorval_window is None

    def test_as_dict(self):
        d = compute_thresholds(exact(4, 3, 2, 2), UNIT).as_dict()
        assert d["ap"] == {"mu": 2, "lambda": 1, "s": 7, "mu_zero_allowed": True}
        assert d["cantorval_window"] == [F(1, 8), F(2, 13)]


class TestCantorvalCheck:
    def test_examples(self):
        assert cantorval_necessary_check(exact(4, 3, 2, 2), UNIT, 7)
        assert not cantorval_necessary_check(exact(3, 2), UNIT, 1)
        # s * k_m == K
        assert not cantorval_necessary_check(exact(2, 2), UNIT, 2)

    def test_negative_s(self):
        with pytest.raises(DomainError):
            cantorval_necessary_check(exact(1), UNIT, -1)


class TestClassify:
    def test_examples(self):
        assert classify(exact(4, 3, 2, 2), UNIT, 0.13).label is Label.CANTORVAL
        assert classify(Coefficients((1,)), ID, 0.6).label is Label.INTERVAL
        assert classify(Coefficients((1,)), ID, 0.4).label is Label.CANTOR
        assert classify(Coefficients((3, 2)), ID, 0.25).label is Label.NOT_FINITE_UNION

    def test_justification_lists_all_hypotheses(self):
        v = classify(exact(4, 3, 2, 2), UNIT, F(13, 100))
        rules = [rule for rule, _ in v.justification]
        assert rules == ["contains-interval", "cantorval", "not-finite-union"]

    def test_indeterminate(self):
        # above d_NI but below d_I when a < b
        env = PowerEnvelope(F(1, 2), 1, 1)
        th = compute_thresholds(exact(3, 2), env)
        x = (th.d_NI + th.d_I) / 2
        v = classify(exact(3, 2), env, x)
        assert th.d_NI < x < th.d_I
        assert v.label is Label.INDETERMINATE

    def test_endpoint_note(self):
        env = PowerEnvelope(1, 1, 1, F(3, 4))
        v = classify(exact(1), env, F(3, 4))
        assert v.label is Label.INTERVAL
        assert "epsilon" in v.justification[0][1] and "closed endpoint" in v.justification[0][1]

    def test_beyond_radius_not_interval(self):
        env = PowerEnvelope(1, 1, 1, F(3, 5))
        assert classify(exact(1), env, F(7, 10)).label is Label.INDETERMINATE

    @pytest.mark.parametrize("x", [0, 1, -0.5, 1.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            classify(exact(1), UNIT, x)

    def test_labels_cite_hypotheses(self):
        for x in [i / 100 for i in range(1, 100)]:
            v = classify(exact(4, 3, 2, 2), UNIT, x)
            if v.label is not Label.INDETERMINATE:
                assert v.justification

    def test_interval_implies_residue_all_le(self):
        for k in [(1,), (3, 2), (4, 3, 2, 2), (5, 1, 1)]:
            c = exact(*k)
            for x in [F(i, 50) for i in range(1, 50)]:
                if classify(c, ID, x).label is Label.INTERVAL:
                    assert residue_certificate(c, ID, x).all_le, (k, x)


@st.composite
def threshold_case(draw):
    m = draw(st.integers(1, 6))
    k = sorted((draw(st.integers(1, 40)) for _ in range(m)), reverse=True)
    a = F(draw(st.integers(1, 20)), 20)
    b = a + F(draw(st.integers(0, 40)), 20)
    r = draw(st.sampled_from([1, 2, 3]))
    return Coefficients(tuple(F(v) for v in k)), PowerEnvelope(a, b, r)


@settings(max_examples=200, deadline=None)
@given(threshold_case())
def test_orderings(case):
    c, env = case
    th = compute_thresholds(c, env)
    assert th.d_C <= th.d_NI
    assert th.d_I <= th.d_IM
    if c.m == 1:
        assert th.d_I == th.d_IM and th.d_C == th.d_NI
    if not cantorval_necessary_check(c, env, th.ap.s):
        assert th.cantorval_window is None
    else:
        assert th.cantorval_window is not None


@settings(max_examples=200, deadline=None)
@given(threshold_case(), st.integers(1, 50))
def test_scaling_invariance(case, factor):
    c, env = case
    scaled = Coefficients(tuple(v * factor for v in c.k))
    a, b = compute_thresholds(c, env), compute_thresholds(scaled, env)
    assert (a.d_I, a.d_IM, a.d_NI, a.d_C, a.d_CI) == (b.d_I, b.d_IM, b.d_NI, b.d_C, b.d_CI)
    assert a.ap.s == b.ap.s
