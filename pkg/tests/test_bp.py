import numpy as np
import pytest

from rgtoric.bp import MessageSet, bp_round, changes_csv, init_messages, outgoing, route, run_bp, total_variation
from rgtoric.lattice import TorusLattice, syndrome_bits
from rgtoric.noise import sample_codes, trial_rng
from rgtoric.rg import TorusModel, build_level, renormalize_level


def level_for(basis, codes, p, ell=8):
    lat = TorusLattice(ell)
    codes = np.atleast_2d(codes)
    plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
    return build_level(TorusModel.depolarizing(lat, p), plaq, site, basis)


def trivial_level(basis, p=0.1, ell=8):
    return level_for(basis, np.zeros(2 * ell * ell, np.uint8), p, ell)


def test_init_messages(basis):
    m = init_messages(trivial_level(basis))
    assert m.incoming.shape == (1, 16, 8, 4)
    assert m.t == 0
    assert np.all(m.incoming == 0.25)


def test_routing_matches_shared_map(basis):
    layout = trivial_level(basis).layout
    k = layout.kernel
    ns = len(k.shared)
    geom = basis.geometry
    assert np.array_equal(layout.route[layout.route], np.arange(layout.route.size))
    for src, dst in enumerate(layout.route):
        c, t = divmod(src, ns)
        c2, t2 = divmod(int(dst), ns)
        assert layout.shared_edges[c, t] == layout.shared_edges[c2, t2]
        assert c != c2
        (dx, dy), q2 = geom.shared_map[k.shared[t]]
        assert k.shared[t2] == q2


def test_messages_normalized_every_round(basis):
    codes = sample_codes(128, 0.15, trial_rng(1))
    level = level_for(basis, codes, 0.15)
    msgs = init_messages(level)
    for _ in range(3):
        msgs = bp_round(msgs, level)
        assert (msgs.incoming >= 0).all()
        assert np.allclose(msgs.incoming.sum(axis=-1), 1)
    assert msgs.t == 3


def test_translation_symmetric_fixed_point(basis):
    msgs, changes = run_bp(trivial_level(basis), 3)
    inc = msgs.incoming[0]
    assert np.allclose(inc, inc[:1], rtol=0, atol=1e-12)
    assert len(changes) == 3


def test_uniform_priors_give_uniform_messages(basis):
    msgs, _ = run_bp(trivial_level(basis, p=0.75), 2)
    assert np.allclose(msgs.incoming, 0.25)


def test_division_round_trip(basis):
    codes = sample_codes(128, 0.12, trial_rng(2))
    level = level_for(basis, codes, 0.12)
    msgs = bp_round(init_messages(level), level)
    out, _ = outgoing(level, msgs)
    _, post = level.cell_pass(msgs.incoming, posteriors=True)
    back = out * msgs.incoming * level.shared_prior
    back /= back.sum(axis=-1, keepdims=True)
    assert np.allclose(back, post, rtol=0, atol=1e-12)


def test_zero_rounds_is_no_bp(basis):
    codes = sample_codes(128, 0.13, trial_rng(3))
    lat = TorusLattice(8)
    plaq, site = syndrome_bits(lat, codes[None] & 1, codes[None] >> 1)
    model = TorusModel.depolarizing(lat, 0.13)
    level = build_level(model, plaq, site, basis)
    msgs, changes = run_bp(level, 0)
    assert changes == [] and np.all(msgs.incoming == 0.25)
    plain, _ = level.cell_pass(None, posteriors=False)
    uni, _ = level.cell_pass(msgs.incoming, posteriors=False)
    assert np.allclose(plain, uni, rtol=0, atol=1e-15)
    out = renormalize_level(model, plaq, site, 0, basis)
    J = plain.reshape(1, -1, 4, 4).swapaxes(-1, -2)
    assert np.allclose(out.coarse_model.joints, J, rtol=0, atol=1e-15)


def test_negative_rounds_rejected(basis):
    with pytest.raises(ValueError):
        run_bp(trivial_level(basis), -1)


def test_changes_shrink(basis):
    n = 100
    codes = np.array([sample_codes(128, 0.1, trial_rng(77, i)) for i in range(n)])
    level = level_for(basis, codes, 0.1)
    hist = [init_messages(level)]
    for _ in range(3):
        hist.append(bp_round(hist[-1], level))

    def change(a, b):
        return 0.5 * np.abs(a.incoming - b.incoming).sum(axis=-1).max(axis=(1, 2))

    # loopy graph: a few instances may oscillate, so the check is statistical
    first, last = change(hist[1], hist[0]), change(hist[3], hist[2])
    assert (last < first).sum() >= 95
    assert np.median(last) < 0.75 * np.median(first)


def two_cell_level(basis):
    lat = TorusLattice(8)
    codes = np.zeros(lat.n, np.uint8)
    codes[lat.h(3, 4)] = 1
    level = level_for(basis, codes, 1e-3)
    L = level.layout
    lo, up = L.anchors.index((2, 2)), L.anchors.index((2, 4))
    k = L.kernel
    tq_lo, tq_up = k.shared.index(4), k.shared.index(2)
    assert L.shared_edges[lo, tq_lo] == L.shared_edges[up, tq_up] == lat.h(3, 4)
    return level, (lo, tq_lo), (up, tq_up)


def test_two_cell_pre_bp_half(basis):
    level, _, (up, tq) = two_cell_level(basis)
    _, post = level.cell_pass(None, posteriors=True)
    assert post[0, up, tq, 1] == pytest.approx(0.5, abs=0.05)


def test_two_cell_post_bp_dominance(basis):
    level, a, b = two_cell_level(basis)
    msgs = bp_round(init_messages(level), level)
    _, post = level.cell_pass(msgs.incoming, posteriors=True)
    for c, t in (a, b):
        assert post[0, c, t].argmax() == 1
        assert post[0, c, t, 1] > 0.9


def test_damping(basis):
    codes = sample_codes(128, 0.15, trial_rng(4))
    level = level_for(basis, codes, 0.15)
    start = init_messages(level)
    full = bp_round(start, level)
    assert np.allclose(bp_round(start, level, damping=1.0).incoming, 0.25)
    half = bp_round(start, level, damping=0.5)
    assert np.allclose(half.incoming, 0.5 * full.incoming + 0.125)


def test_route_is_delivery(basis):
    level = trivial_level(basis)
    out = np.random.default_rng(0).random((1, level.ncells, level.nshared, 4))
    new = route(level, out)
    flat_out, flat_new = out.reshape(-1, 4), new.reshape(-1, 4)
    assert np.array_equal(flat_new[level.layout.route], flat_out)


def test_diagnostics():
    assert total_variation(np.array([[1.0, 0, 0, 0]]), np.array([[0, 1.0, 0, 0]])) == 1.0
    csv = changes_csv([[0.5, 0.25], [0.1]])
    assert csv.splitlines() == ["level,round,tv_change", "0,1,5.000000e-01", "0,2,2.500000e-01", "1,1,1.000000e-01"]
    assert MessageSet(np.zeros((1, 1, 1, 4))).zero_messages == 0
