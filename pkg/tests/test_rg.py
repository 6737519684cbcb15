import numpy as np
import pytest

from oracles import torus_errors, torus_syndrome_and_class
from rgtoric.lattice import Syndrome, TorusLattice, class_bits, stabilizer_generators, syndrome_bits
from rgtoric.noise import CellErrorModel, sample_codes, trial_rng
from rgtoric.pauli import PauliOp, commutes, product
from rgtoric.rg import (
    DecoderConfig,
    DecoderSizeError,
    TorusModel,
    cell_conditional,
    decode,
    decode_batch,
    exact_ml,
    marginals,
    reference_error,
    renormalize_level,
    small_torus,
    torus_class_distribution,
)

# brute-force enumeration of all 4**12 cell errors, depolarizing p = 0.15
CELL_PL_C0 = [
    9.411339610121e-01, 1.089249568435e-02, 1.089249568435e-02, 1.992162773270e-03,
    1.089249568435e-02, 4.560723044317e-03, 3.116746083049e-04, 3.649365615937e-04,
    1.089249568435e-02, 3.116746083049e-04, 4.560723044317e-03, 3.649365615937e-04,
    1.992162773270e-03, 3.649365615937e-04, 3.649365615937e-04, 1.071891523218e-04,
]
CELL_PL1_C42 = [0.390962886749, 0.073050239802, 0.382128657882, 0.153858215566]

# brute-force enumeration of all 4**8 errors on the ell = 2 torus, p = 0.1, trivial syndrome
TORUS2_TRIVIAL = [
    9.885658297468e-01, 2.730741218609e-03, 2.730741218609e-03, 2.025489156629e-04,
    2.730741218609e-03, 2.242344806064e-05, 2.242344806064e-05, 2.207601129236e-06,
    2.730741218609e-03, 2.242344806064e-05, 2.242344806064e-05, 2.207601129236e-06,
    2.025489156629e-04, 2.207601129236e-06, 2.207601129236e-06, 7.583350687774e-06,
]


def stabilizer_pattern(basis, op):
    return sum((not commutes(op, s)) << i for i, s in enumerate(basis.stabilizers))


def test_reference_error_examples(basis):
    assert reference_error(basis, 0).is_identity()
    assert reference_error(basis, 1) == basis.pure_errors[0]
    for c in range(64):
        assert stabilizer_pattern(basis, reference_error(basis, c)) == c


def test_coset_consistency(basis):
    c = int(np.random.default_rng().integers(64))
    gens = [op for pair in basis.logical_pairs for op in pair]
    gens += [op for pair in basis.edge_pairs for op in pair] + list(basis.stabilizers)
    T = reference_error(basis, c)
    vecs = np.array([g.vector() for g in gens], dtype=np.uint8)
    bits = (np.arange(1 << len(gens))[:, None] >> np.arange(len(gens))) & 1
    elems = (bits @ vecs & 1).astype(np.uint8) ^ T.vector()
    stabs = np.array([np.concatenate([s.zbits(), s.xbits()]) for s in basis.stabilizers], dtype=np.int64)
    syn = (elems.astype(np.int64) @ stabs.T & 1) @ (1 << np.arange(6))
    assert np.all(syn == c)


def test_cell_table_frozen_values(basis):
    m = CellErrorModel.depolarizing(0.15)
    assert np.allclose(marginals(cell_conditional(m, basis, 0)).logical, CELL_PL_C0, rtol=0, atol=1e-12)
    assert np.allclose(marginals(cell_conditional(m, basis, 42)).logical1, CELL_PL1_C42, rtol=0, atol=1e-12)


@pytest.mark.parametrize("c", [0, 9, 42, 63])
def test_fast_matches_literal(basis, c):
    rng = np.random.default_rng(c)
    m = CellErrorModel.depolarizing(0.2)
    msgs = {q: rng.random(4) for q in basis.geometry.shared_slots}
    fast = cell_conditional(m, basis, c, msgs)
    lit = cell_conditional(m, basis, c, msgs, method="literal")
    assert np.allclose(fast.table, lit.table, rtol=0, atol=1e-14)


def test_strictly_positive(basis):
    m = CellErrorModel.depolarizing(0.07)
    for c in range(0, 64, 7):
        t = cell_conditional(m, basis, c)
        assert (t.table > 0).all() and t.table.sum() == pytest.approx(1)


def test_small_p_concentrates(basis):
    t = cell_conditional(CellErrorModel.depolarizing(1e-6), basis, 0).table
    assert t[0, 0] > 0.9999


def test_uniform_messages_are_a_no_op(basis):
    m = CellErrorModel.depolarizing(0.12)
    plain = cell_conditional(m, basis, 21).table
    uni = cell_conditional(m, basis, 21, {q: np.full(4, 0.25) for q in basis.geometry.shared_slots}).table
    assert np.allclose(plain, uni, rtol=0, atol=1e-15)


def test_degenerate_table_flagged(basis):
    t = cell_conditional(CellErrorModel.depolarizing(0.0), basis, 5)
    assert t.degenerate
    assert np.allclose(t.table, 1 / t.table.size)


def test_marginals_examples():
    m = marginals(np.full((16, 256), 1 / 4096))
    assert np.allclose(m.logical, 1 / 16) and np.allclose(m.logical1, 0.25) and np.allclose(m.edges, 0.25)
    assert m.factorizes and m.logical1.sum() == pytest.approx(1)
    rng = np.random.default_rng(0)
    a, b = rng.random(4), rng.random(4)
    a, b = a / a.sum(), b / b.sum()
    PL = np.outer(a, b).T.reshape(16)  # L = l1 + 4 l2
    prod = marginals(np.outer(PL, np.full(256, 1 / 256)))
    assert prod.factorizes and np.allclose(prod.logical1, a) and np.allclose(prod.logical2, b)
    skew = np.zeros((16, 256))
    skew[0, 0] = skew[5, 0] = 0.5
    assert not marginals(skew).factorizes


def test_exact_ml_cell_matches_table(basis):
    m = CellErrorModel.depolarizing(0.15)
    assert np.allclose(exact_ml(basis, 0, m), CELL_PL_C0, rtol=0, atol=1e-12)


def test_exact_ml_torus_frozen():
    lat = TorusLattice(2)
    d = exact_ml(lat, Syndrome.trivial(lat), TorusModel.depolarizing(lat, 0.1))
    assert np.allclose(d, TORUS2_TRIVIAL, rtol=0, atol=1e-12)
    assert d.argmax() == 0


def test_exact_ml_partition_identity():
    lat = TorusLattice(2)
    rng = np.random.default_rng(5)
    priors = rng.random((1, lat.n, 4))
    priors /= priors.sum(axis=-1, keepdims=True)
    codes = torus_errors(lat)
    prob = np.prod(priors[0, np.arange(lat.n), codes], axis=1)
    st = small_torus(2)
    plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
    for k in rng.choice(len(codes), 4, replace=False):
        p, s = plaq[k], site[k]
        ref = st.reference_codes(p[None], s[None])[0]
        syn, cls = torus_syndrome_and_class(lat, codes, ref)
        mask = syn == syn[k]
        want = np.bincount(cls[mask], weights=prob[mask], minlength=16)
        got = exact_ml(lat, Syndrome(p, s), TorusModel(lat, priors))
        assert np.allclose(got, want / want.sum(), rtol=0, atol=1e-12)


def test_exact_ml_uniform_model():
    lat = TorusLattice(2)
    rng = np.random.default_rng(6)
    codes = rng.integers(0, 4, lat.n)
    syn = Syndrome(*syndrome_bits(lat, codes & 1, codes >> 1))
    d = exact_ml(lat, syn, TorusModel(lat, np.full((1, lat.n, 4), 0.25)))
    assert np.allclose(d, 1 / 16)


def test_exact_ml_size_error():
    lat = TorusLattice(4)
    with pytest.raises(DecoderSizeError):
        exact_ml(lat, Syndrome.trivial(lat), TorusModel.depolarizing(lat, 0.1))


def test_renormalize_level_trivial(basis):
    lat = TorusLattice(8)
    triv = np.zeros((1, lat.nchecks), np.uint8)
    out = renormalize_level(TorusModel.depolarizing(lat, 0.1), triv, triv, 3, basis)
    pri = out.coarse_model.priors
    assert pri.shape == (1, 2 * 4 * 4, 4)
    assert (pri.argmax(axis=-1) == 0).all()
    assert np.allclose(pri.sum(axis=-1), 1, atol=1e-9)
    assert np.allclose(out.coarse_model.joints.sum(axis=(-1, -2)), 1, atol=1e-9)
    assert not out.coarse_plaq.any() and not out.coarse_site.any()


def test_coarse_syndrome_of_stabilizer_error(basis):
    lat = TorusLattice(8)
    sites, plaqs = stabilizer_generators(lat)
    s = product(sites[::3] + plaqs[1::5], lat.n)
    plaq, site = syndrome_bits(lat, s.xbits(), s.zbits())
    out = renormalize_level(TorusModel.depolarizing(lat, 0.1), plaq[None], site[None], 0, basis)
    assert not out.coarse_plaq.any() and not out.coarse_site.any()


def test_decode_p0_trivial():
    lat = TorusLattice(8)
    res = decode(lat, Syndrome.trivial(lat), 0.0)
    assert res.class_index == 0
    assert res.distribution[0] == pytest.approx(1.0, abs=1e-12)
    assert res.correction.is_identity() or class_bits(lat, res.correction.xbits(), res.correction.zbits()) == 0


def test_decode_single_x_error():
    lat = TorusLattice(8)
    for e in range(0, lat.n, 9):
        err = PauliOp.single(lat.n, e, "X")
        syn = Syndrome(*syndrome_bits(lat, err.xbits(), err.zbits()))
        res = decode(lat, syn, 0.05)
        resid = err * res.correction
        assert Syndrome(*syndrome_bits(lat, resid.xbits(), resid.zbits())).is_trivial()
        assert class_bits(lat, resid.xbits(), resid.zbits()) == 0


def test_decode_rejects_bad_input():
    from rgtoric.lattice import LatticeError, SyndromeError

    with pytest.raises(LatticeError):
        decode(TorusLattice(6), Syndrome.trivial(TorusLattice(6)), 0.1)
    lat = TorusLattice(8)
    bad = Syndrome.trivial(lat)
    bad.plaquette_bits[0] = 1
    with pytest.raises(SyndromeError):
        decode(lat, bad, 0.1)


def failure_rate(ell, p, trials, seed):
    lat = TorusLattice(ell)
    codes = np.array([sample_codes(lat.n, p, trial_rng(seed, i)) for i in range(trials)])
    plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
    res = decode_batch(lat, plaq, site, p)
    resid = codes ^ res.corrections
    return float((class_bits(lat, resid & 1, resid >> 1) != 0).mean())


@pytest.mark.slow
def test_rate_monotone_in_p_ell4():
    assert failure_rate(4, 0.08, 10_000, 1) < failure_rate(4, 0.20, 10_000, 2)


def test_stabilizer_equivalent_errors_same_outcome():
    lat = TorusLattice(8)
    sites, plaqs = stabilizer_generators(lat)
    rng = np.random.default_rng(8)
    for t in range(10):
        codes = sample_codes(lat.n, 0.12, trial_rng(3, t))
        s = product([g for g, k in zip(sites + plaqs, rng.integers(0, 2, 2 * lat.nchecks)) if k], lat.n)
        other = codes ^ s.codes().astype(np.uint8)
        both = np.stack([codes, other])
        plaq, site = syndrome_bits(lat, both & 1, both >> 1)
        res = decode_batch(lat, plaq, site, 0.12)
        resid = both ^ res.corrections
        ok = class_bits(lat, resid & 1, resid >> 1) == 0
        assert ok[0] == ok[1]


def test_batch_matches_single():
    lat = TorusLattice(8)
    codes = np.array([sample_codes(lat.n, 0.14, trial_rng(4, i)) for i in range(6)])
    plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
    batch = decode_batch(lat, plaq, site, 0.14)
    for i in range(6):
        one = decode_batch(lat, plaq[i : i + 1], site[i : i + 1], 0.14)
        assert np.array_equal(one.corrections[0], batch.corrections[i])
        assert np.allclose(one.distributions[0], batch.distributions[i], rtol=0, atol=1e-15)


def test_torus_distribution_with_joints_matches_bruteforce():
    lat = TorusLattice(2)
    rng = np.random.default_rng(9)
    pairs = np.array([[0, 4], [2, 6]])
    joints = rng.random((1, 2, 4, 4))
    joints /= joints.sum(axis=(-1, -2), keepdims=True)
    priors = rng.random((1, lat.n, 4))
    priors /= priors.sum(axis=-1, keepdims=True)
    model = TorusModel(lat, priors, joints, pairs)
    codes = torus_errors(lat)
    prob = np.ones(len(codes))
    for k, (a, b) in enumerate(pairs):
        prob *= joints[0, k, codes[:, a], codes[:, b]]
    for e in (1, 3, 5, 7):
        prob *= priors[0, e, codes[:, e]]
    syn, cls = torus_syndrome_and_class(lat, codes, np.zeros(lat.n, np.int64))
    mask = syn == 0
    want = np.bincount(cls[mask], weights=prob[mask], minlength=16)
    triv = np.zeros((1, 4), np.uint8)
    assert np.allclose(torus_class_distribution(model, triv, triv)[0], want / want.sum(), rtol=0, atol=1e-12)


def test_config_rejects_unknown_geometry():
    with pytest.raises(ValueError):
        DecoderConfig(geometry="hexagon").basis()


def test_batched_coarse_syndrome_matches_lattice(basis):
    from rgtoric.lattice import coarse_grain_syndrome

    lat = TorusLattice(8)
    codes = sample_codes(lat.n, 0.2, trial_rng(12))
    plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
    out = renormalize_level(TorusModel.depolarizing(lat, 0.2), plaq[None], site[None], 0, basis)
    want = coarse_grain_syndrome(Syndrome(plaq, site), lat)
    assert np.array_equal(out.coarse_plaq[0], want.plaquette_bits)
    assert np.array_equal(out.coarse_site[0], want.site_bits)
