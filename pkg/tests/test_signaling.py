"""Tone-based initial access protocol."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beamacq.arrays import ArrayGeometry, grid_phases
from beamacq.channel import Channel, PathComponent
from beamacq.codebooks import build_codebook
from beamacq.signaling import (
    Network,
    ProtocolError,
    TrainingConfig,
    assign_tones,
    downlink_observations,
    pilot_symbols,
    run_initial_access,
    schedule,
    uplink_observations,
)

G = ArrayGeometry("ULA", 2, 16)


def grid_angle(k, c=64):
    """ULA angle whose sin-space phase is grid point ``k`` of ``c``."""
    s = 2 * k / c
    return float(np.arcsin(s - 2 if s > 1 else s))


def network(links, aps=("A",), mobiles=("m",)):
    """``links`` maps (ap, mobile) to a list of (gain, aoa, aod)."""
    chans = {k: Channel.for_arrays([PathComponent(*p) for p in v], G, G, *k) for k, v in links.items()}
    return Network({a: G for a in aps}, {m: G for m in mobiles}, chans)


def config(net, P=32, Q=32, I=1, kind="full", ap_power=1.0, mobile_power=1.0, noise=1.0, **kw):
    ap_cb = {a: build_codebook(kind, G, Q) for a in net.ap_ids}
    mob_cb = {m: build_codebook(kind, G, P) for m in net.mobile_ids}
    return TrainingConfig(P, Q, I, ap_power, mobile_power, noise, ap_cb, mob_cb, **kw)


class TestTones:
    def test_canonical(self):
        assert assign_tones(["m0", "m1", "m2"]) == {"m0": 0, "m1": 1, "m2": 2}

    def test_many(self):
        t = assign_tones(range(1000))
        assert len(set(t.values())) == 1000

    @given(st.permutations(list(range(12))))
    def test_permuted_injective(self, ids):
        t = assign_tones(ids)
        assert sorted(t.values()) == list(range(12)) and t[ids[0]] == 0

    def test_duplicate(self):
        with pytest.raises(ValueError):
            assign_tones([1, 2, 1])


class TestPilots:
    def test_unit_modulus_and_fixed(self):
        x = pilot_symbols("ap-3", 64)
        np.testing.assert_allclose(np.abs(x), 1.0, atol=1e-15)
        np.testing.assert_array_equal(x, pilot_symbols("ap-3", 64))
        assert not np.allclose(x, pilot_symbols("ap-4", 64))

    def test_slot_accounting(self):
        net = network({})
        assert config(net, 8, 4).training_slots == 8 * 4 + 4 + 2
        assert config(net, 8, 4, I=3).pilot_budget == 96


class TestDownlink:
    def test_matched_sample(self, rng):
        a, d = grid_angle(10, 32), grid_angle(23, 32)
        net = network({("A", "m"): [(0.01 - 0.02j, a, d)]})
        cfg = config(net, ap_power=0.5, noise=1e-300)
        Y = downlink_observations(net, cfg, rng)["m"].values
        x = pilot_symbols("A", 32)
        nu = net.channels[("A", "m")].antenna_gain
        assert Y[10, 23] / x[23] == pytest.approx(np.sqrt(0.5) * nu * (0.01 - 0.02j), rel=1e-10)

    def test_noise_variance(self):
        net = network({})
        cfg = config(net, I=4, noise=2.0)
        rng = np.random.default_rng(0)
        y = np.concatenate([downlink_observations(net, cfg, rng)["m"].values.ravel() for _ in range(10)])
        assert y.size >= 10_000
        assert np.var(y) == pytest.approx(2.0 / 4, rel=0.03)

    def test_linear_in_gains(self):
        p1, p2 = (0.3j, 0.2, -0.5), (1.0, -0.9, 0.4)
        nets = [network({("A", "m"): p}) for p in ([p1], [p2], [p1, p2])]
        for n in nets:
            n.channels[("A", "m")].antenna_gain = 32.0
            n.matrices.clear()
            n.__post_init__()
        cfg = config(nets[0], noise=1e-300)
        Y = [downlink_observations(n, cfg, np.random.default_rng(1))["m"].values for n in nets]
        np.testing.assert_allclose(Y[2], Y[0] + Y[1], atol=1e-12)

    def test_codebook_shape_checked(self, rng):
        net = network({})
        cfg = config(net, P=8, Q=8)
        cfg.P = 16
        with pytest.raises(ValueError):
            downlink_observations(net, cfg, rng)


class TestUplink:
    def test_tone_isolation(self):
        links = {("A", "m1"): [(1e-3, 0.1, 0.2)], ("A", "m2"): [(1.0, -0.3, 0.6)]}
        net = network(links, mobiles=("m1", "m2"))
        quiet = network({("A", "m2"): [(5.0, 0.9, -0.9)]}, mobiles=("m1", "m2"))
        beams = {m: G.response(0.0) for m in ("m1", "m2")}
        cfg = config(net, Q=8)
        r = uplink_observations(net, beams, cfg, np.random.default_rng(4))
        r_quiet = uplink_observations(quiet, beams, cfg, np.random.default_rng(4))
        ref = uplink_observations(network({}, mobiles=("m1", "m2")), beams, cfg, np.random.default_rng(4))
        np.testing.assert_array_equal(r_quiet["A"]["m1"], ref["A"]["m1"])
        assert r["A"]["m1"].shape == (8,)

    def test_reciprocity(self, rng):
        net = network({("A", "m"): [(0.5 + 0.1j, 0.4, -1.1), (0.2j, -0.2, 0.3)]})
        ap_cb = {"A": build_codebook("random", G, 8, rng)}
        mob_cb = {"m": build_codebook("random", G, 8, rng)}
        cfg = TrainingConfig(8, 8, 1, 1.0, 1.0, 1e-300, ap_cb, mob_cb)
        Y = downlink_observations(net, cfg, rng)["m"].values / pilot_symbols("A", 8)[None, :]
        p = 3
        r = uplink_observations(net, {"m": mob_cb["m"].matrix[:, p]}, cfg, rng)["A"]["m"]
        np.testing.assert_allclose(r, Y[p].conj(), rtol=1e-10)

    def test_missing_beamformer(self, rng):
        net = network({}, mobiles=("m1", "m2"))
        with pytest.raises(ProtocolError, match="m2"):
            uplink_observations(net, {"m1": G.response(0.0)}, config(net), rng)


class TestSchedule:
    def test_capacity_and_order(self):
        scores = {("A", 1): 5.0, ("A", 2): 4.0, ("B", 1): 9.0, ("A", 3): 3.0, ("B", 3): 0.0}
        assert schedule(scores, {"A": 1, "B": 2}) == {1: "B", 2: "A"}

    def test_zero_scores_skipped(self):
        assert schedule({("A", 1): 0.0}, {"A": 2}) == {}


class TestInitialAccess:
    @pytest.mark.parametrize("estimator", ["mp", "ml", "lml"])
    def test_single_link_aligns(self, estimator):
        # even indices: also on the 32-beam codebook's own grid, which MP reports
        k_aoa, k_aod = 12, 40
        net = network({("A", "m"): [(1.0, grid_angle(k_aoa), grid_angle(k_aod)),
                                     (0.3, grid_angle(30), grid_angle(5))]})
        cfg = config(net, noise=1e-6)
        out = run_initial_access(net, cfg, estimator, np.random.default_rng(0))
        gp = grid_phases(G, 64)
        assert out.associations == {"m": "A"}
        np.testing.assert_allclose(out.aoa["m"][1] % (2 * np.pi), gp[k_aoa][1], atol=1e-9)
        np.testing.assert_allclose(out.aod["A"]["m"][1] % (2 * np.pi), gp[k_aod][1], atol=1e-9)

    def test_no_power(self):
        net = network({("A", "m"): [(1.0, 0.1, 0.2)]})
        cfg = config(net, ap_power=0.0, mobile_power=0.0)
        out = run_initial_access(net, cfg, "ml", np.random.default_rng(0))
        assert out.associated == []

    @pytest.mark.parametrize("estimator", ["mp", "ml", "lml"])
    def test_nearest_ap(self, estimator):
        links = {("A", "x"): [(1.0, 0.2, -0.4)], ("B", "x"): [(0.01, -0.6, 0.3)],
                 ("A", "y"): [(0.02, 0.5, 0.9)], ("B", "y"): [(1.0, -0.1, 0.7)]}
        net = network(links, aps=("A", "B"), mobiles=("x", "y"))
        out = run_initial_access(net, config(net, noise=1e-6), estimator, np.random.default_rng(2))
        assert out.associations == {"x": "A", "y": "B"}

    def test_ack_requires_both(self):
        net = network({("A", "m"): [(1.0, 0.1, 0.2)]})
        out = run_initial_access(net, config(net, mobile_power=1e-12, noise=1e-3), "lml",
                                 np.random.default_rng(0))
        assert out.associations["m"] is None

    def test_deterministic(self):
        net = network({("A", "m"): [(0.02, 0.1, 0.2), (0.01, -1.0, 0.5)]})
        cfg = config(net, P=8, Q=8)
        a = run_initial_access(net, cfg, "ml", np.random.default_rng(7))
        b = run_initial_access(net, cfg, "ml", np.random.default_rng(7))
        np.testing.assert_array_equal(a.aoa["m"], b.aoa["m"])
        assert a.uplink_score == b.uplink_score and a.associations == b.associations

    def test_unknown_estimator(self, rng):
        net = network({})
        with pytest.raises(ValueError):
            run_initial_access(net, config(net), "music", rng)
