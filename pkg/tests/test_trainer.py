import numpy as np
import pytest

import mmgan.trainer as trainer_mod
from mmgan.data import DatasetHandle, make_dataset
from mmgan.kernel import KernelSpec
from mmgan.loss import LossConfig, batch_radius
from mmgan.manifold import ManifoldTracker, SphereManifold
from mmgan.neural import Network, NumericalError, SGD
from mmgan.trainer import (
    LatentSampler,
    TrainConfig,
    TrainResult,
    blended_stats,
    d_step,
    evaluate,
    g_step,
    train,
    update_trackers,
)


def tiny_cfg(**kw):
    base = dict(steps=5, batch_size=8, latent_dim=2, g_hidden=(8,),
                d_hidden=(8,), lr_g=0.02, lr_d=0.02, eval_interval=2,
                eval_samples=50)
    base.update(kw)
    return TrainConfig(**base)


def single_mode_dataset():
    return DatasetHandle("ring8", 2, np.array([[0.5, -0.25]]), 0.05)


def history_tuples(result):
    return [(r.step, r.l_g_final, r.l_d_final, r.l_orig, r.manifold_term,
             r.radius_term, r.r_g) for r in result.history]


def test_train_smoke_and_result_shape():
    res = train(tiny_cfg(), make_dataset("ring8"))
    assert isinstance(res, TrainResult)
    assert len(res.history) == 5
    assert [r.step for r in res.history] == [1, 2, 3, 4, 5]
    for r in res.history:
        for v in history_tuples(res)[r.step - 1][1:]:
            assert np.isfinite(v)
        assert r.l_orig <= 0.0  # sum of log-probabilities
        assert r.r_g >= 0.0
    assert res.generator.in_dim == 2 and res.generator.out_dim == 2
    assert res.discriminator.out_dim == 1
    assert res.real_tracker.initialized and res.fake_tracker.initialized


def test_train_is_deterministic_per_seed():
    data = make_dataset("ring8")
    a = train(tiny_cfg(seed=11), data)
    b = train(tiny_cfg(seed=11), data)
    assert history_tuples(a) == history_tuples(b)
    for k in a.generator.parameters():
        np.testing.assert_array_equal(a.generator.parameters()[k].value,
                                      b.generator.parameters()[k].value)
    c = train(tiny_cfg(seed=12), data)
    assert history_tuples(a) != history_tuples(c)


def test_longer_run_extends_shorter_run_exactly():
    # steps 1..k of a k+m step run must replay the k step run bit for bit
    data = make_dataset("grid25")
    short = train(tiny_cfg(steps=4, seed=3), data)
    long = train(tiny_cfg(steps=9, seed=3), data)
    assert history_tuples(long)[:4] == history_tuples(short)


def test_step_ordering_is_d_then_trackers_then_g(monkeypatch):
    calls = []
    orig_d, orig_t, orig_g = d_step, update_trackers, g_step
    monkeypatch.setattr(trainer_mod, "d_step",
                        lambda *a, **k: (calls.append("d"), orig_d(*a, **k))[1])
    monkeypatch.setattr(trainer_mod, "update_trackers",
                        lambda *a, **k: (calls.append("t"), orig_t(*a, **k))[1])
    monkeypatch.setattr(trainer_mod, "g_step",
                        lambda *a, **k: (calls.append("g"), orig_g(*a, **k))[1])
    train(tiny_cfg(steps=3), make_dataset("ring8"))
    assert calls == ["d", "t", "g"] * 3


def test_d_steps_per_g_multiplies_d_updates(monkeypatch):
    calls = []
    orig_d, orig_g = d_step, g_step
    monkeypatch.setattr(trainer_mod, "d_step",
                        lambda *a, **k: (calls.append("d"), orig_d(*a, **k))[1])
    monkeypatch.setattr(trainer_mod, "g_step",
                        lambda *a, **k: (calls.append("g"), orig_g(*a, **k))[1])
    train(tiny_cfg(steps=2, d_steps_per_g=3), make_dataset("ring8"))
    assert calls == ["d", "d", "d", "g"] * 2


def test_tracker_states_follow_recorded_minis(monkeypatch):
    # recompute the EWMA from the mini statistics actually folded in
    minis = {"real": [], "fake": []}
    orig = update_trackers

    def spy(cfg, d_net, x, fake_pts, real_tracker, fake_tracker):
        spec = cfg.loss.kernel
        for name, batch in (("real", x), ("fake", fake_pts)):
            feats = d_net.forward_values(batch)[1]
            c = feats.mean(axis=0)
            minis[name].append((c, float(batch_radius(spec, feats, c))))
        return orig(cfg, d_net, x, fake_pts, real_tracker, fake_tracker)

    monkeypatch.setattr(trainer_mod, "update_trackers", spy)
    delta = 0.9
    res = train(tiny_cfg(steps=4, loss=LossConfig(delta=delta)),
                make_dataset("ring8"))
    for name, tracker in (("real", res.real_tracker), ("fake", res.fake_tracker)):
        c, r = minis[name][0]
        for cm, rm in minis[name][1:]:
            c = delta * c + (1 - delta) * cm
            r = delta * r + (1 - delta) * rm
        np.testing.assert_allclose(tracker.current.centroid, c, rtol=1e-12)
        assert tracker.current.radius == pytest.approx(r, rel=1e-12)


def test_delta_zero_tracker_equals_last_mini(monkeypatch):
    minis = []
    orig = update_trackers

    def spy(cfg, d_net, x, fake_pts, real_tracker, fake_tracker):
        feats = d_net.forward_values(x)[1]
        c = feats.mean(axis=0)
        minis.append((c, float(batch_radius(None, feats, c))))
        return orig(cfg, d_net, x, fake_pts, real_tracker, fake_tracker)

    monkeypatch.setattr(trainer_mod, "update_trackers", spy)
    res = train(tiny_cfg(steps=3, loss=LossConfig(delta=0.0)),
                make_dataset("ring8"))
    np.testing.assert_allclose(res.real_tracker.current.centroid, minis[-1][0],
                               rtol=1e-12)
    assert res.real_tracker.current.radius == pytest.approx(minis[-1][1], rel=1e-12)


@pytest.mark.parametrize("loss_cfg", [
    LossConfig(delta=0.9),
    LossConfig(delta=0.9, kernel=KernelSpec("rbf", gamma=0.5)),
], ids=["plain", "rbf"])
def test_g_step_blend_value_coincides_with_tracker(monkeypatch, loss_cfg):
    seen = []
    orig = g_step

    def spy(cfg, g_net, d_net, opt_g, z, feat_real, pre_fake, rt, ft):
        # recompute the blended fake statistic before the update mutates G
        feats = d_net.forward_values(g_net.forward_values(z)[0])[1]
        c_mini = feats.mean(axis=0)
        r_mini = float(batch_radius(cfg.loss.kernel, feats, c_mini))
        d = cfg.loss.delta
        if pre_fake is None:
            blend_c, blend_r = c_mini, r_mini
        else:
            blend_c = d * pre_fake.centroid + (1 - d) * c_mini
            blend_r = d * pre_fake.radius + (1 - d) * r_mini
        seen.append((blend_c, blend_r, ft.current.centroid.copy(),
                     ft.current.radius))
        return orig(cfg, g_net, d_net, opt_g, z, feat_real, pre_fake, rt, ft)

    monkeypatch.setattr(trainer_mod, "g_step", spy)
    train(tiny_cfg(steps=4, loss=loss_cfg), make_dataset("ring8"))
    assert len(seen) == 4
    for blend_c, blend_r, track_c, track_r in seen:
        np.testing.assert_allclose(blend_c, track_c, rtol=1e-10, atol=1e-12)
        assert blend_r == pytest.approx(track_r, rel=1e-10, abs=1e-12)


def test_baseline_mode_skips_manifold_machinery(monkeypatch):
    called = []
    monkeypatch.setattr(trainer_mod, "update_trackers",
                        lambda *a, **k: called.append(1))
    res = train(tiny_cfg(steps=4, baseline_mode=True), make_dataset("ring8"))
    assert called == []
    assert not res.real_tracker.initialized
    assert len(res.history) == 4
    assert all(np.isfinite(r.l_g_final) for r in res.history)


def test_numerical_error_carries_step_index(monkeypatch):
    calls = []

    def bomb(*a, **k):
        calls.append(1)
        if len(calls) == 2:
            raise NumericalError("boom")
        return g_step(*a, **k)

    monkeypatch.setattr(trainer_mod, "g_step", bomb)
    with pytest.raises(NumericalError, match=r"boom \(step 2\)"):
        train(tiny_cfg(steps=5), make_dataset("ring8"))


def test_on_eval_fires_at_interval_and_final_step():
    fired = []
    train(tiny_cfg(steps=5, eval_interval=2),
          make_dataset("ring8"),
          on_eval=lambda step, g, rep: fired.append(step))
    assert fired == [2, 4, 5]


# -- seam-level unit tests --------------------------------------------------


def make_pair(seed=0):
    rng = np.random.default_rng(seed)
    g = Network.create((2, 8, 2), out_activation="identity",
                       feature_tap_index=1, rng=rng)
    d = Network.create((2, 8, 1), out_activation="sigmoid", rng=rng)
    return g, d


def snapshot(net):
    return {k: p.value.copy() for k, p in net.parameters().items()}


def changed(net, snap):
    return any(not np.array_equal(p.value, snap[k])
               for k, p in net.parameters().items())


def test_d_step_touches_only_discriminator():
    cfg = tiny_cfg()
    g, d = make_pair()
    opt_d = SGD(d.parameters(), cfg.lr_d)
    rng = np.random.default_rng(1)
    x, z = rng.normal(size=(8, 2)), rng.normal(size=(8, 2))
    gs, ds = snapshot(g), snapshot(d)
    loss_d, lo, fake_pts = d_step(cfg, g, d, opt_d, x, z,
                                  ManifoldTracker(0.9), ManifoldTracker(0.9))
    assert changed(d, ds) and not changed(g, gs)
    assert np.isfinite(loss_d) and lo <= 0.0
    assert fake_pts.shape == (8, 2)


def test_g_step_touches_only_generator():
    cfg = tiny_cfg()
    g, d = make_pair()
    opt_g = SGD(g.parameters(), cfg.lr_g)
    rng = np.random.default_rng(2)
    x, z = rng.normal(size=(8, 2)), rng.normal(size=(8, 2))
    rt, ft = ManifoldTracker(0.9), ManifoldTracker(0.9)
    fake_pts = g.forward_values(z)[0]
    feat_real, _ = update_trackers(cfg, d, x, fake_pts, rt, ft)
    gs, ds = snapshot(g), snapshot(d)
    out = g_step(cfg, g, d, opt_g, z, feat_real, None, rt, ft)
    assert changed(g, gs) and not changed(d, ds)
    assert all(np.isfinite(v) for v in out)


def test_update_trackers_initializes_both():
    cfg = tiny_cfg()
    g, d = make_pair()
    rng = np.random.default_rng(3)
    x = rng.normal(size=(8, 2))
    fake_pts = g.forward_values(rng.normal(size=(8, 2)))[0]
    rt, ft = ManifoldTracker(0.9), ManifoldTracker(0.9)
    feat_real, feat_fake = update_trackers(cfg, d, x, fake_pts, rt, ft)
    assert rt.initialized and ft.initialized
    assert feat_real.shape == (8, 8) and feat_fake.shape == (8, 8)
    np.testing.assert_allclose(rt.current.centroid, feat_real.mean(axis=0))


def test_blended_stats_uninitialized_passes_mini_through():
    feats = np.random.default_rng(4).normal(size=(6, 3))
    c, r = blended_stats(0.9, ManifoldTracker(0.9), feats, None)
    np.testing.assert_allclose(c, feats.mean(axis=0))
    assert r == pytest.approx(batch_radius(None, feats, feats.mean(axis=0)))


def test_blended_stats_hand_case():
    feats = np.array([[1.0, 0.0], [3.0, 0.0]])  # c_mini=(2,0), r_mini=1
    t = ManifoldTracker(0.9)
    t.current = SphereManifold(np.array([0.0, 0.0]), 3.0)
    c, r = blended_stats(0.9, t, feats, None)
    np.testing.assert_allclose(c, [0.2, 0.0])
    assert r == pytest.approx(0.9 * 3.0 + 0.1 * 1.0)
    # value path must not mutate the tracker itself
    assert t.current.radius == 3.0


def test_training_fits_a_single_gaussian():
    data = single_mode_dataset()
    cfg = tiny_cfg(steps=400, batch_size=32, g_hidden=(16, 16),
                   d_hidden=(16, 16), lr_g=0.05, lr_d=0.05, seed=5)
    res = train(cfg, data)
    row = evaluate(res.generator, data, 400, seed=5)
    assert row.centroid_gap < 0.25
    assert row.radius_gap < 0.5


def test_latent_sampler():
    ls = LatentSampler(3)
    a = ls.draw(np.random.default_rng(0), 5)
    b = ls.draw(np.random.default_rng(0), 5)
    assert a.shape == (5, 3)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        LatentSampler(0)
    with pytest.raises(ValueError):
        ls.draw(np.random.default_rng(0), 0)


def test_train_config_validation():
    for kw in (dict(steps=0), dict(batch_size=1), dict(latent_dim=0),
               dict(d_steps_per_g=0), dict(eval_interval=0),
               dict(eval_samples=0), dict(seed=-1), dict(lr_g=0.0),
               dict(lr_d=-1.0)):
        with pytest.raises(ValueError):
            tiny_cfg(**kw)


def test_evaluate_deterministic_and_validates():
    g, _ = make_pair()
    data = make_dataset("ring8")
    a = evaluate(g, data, 200, seed=7, step=3)
    b = evaluate(g, data, 200, seed=7, step=3)
    assert a == b
    c = evaluate(g, data, 200, seed=7, step=4)
    assert a != c
    with pytest.raises(ValueError, match="empty evaluation"):
        evaluate(g, data, 0)


def test_evaluate_without_mode_centers_zeroes_mode_metrics():
    g = Network.create((2, 8, 4), feature_tap_index=1,
                       rng=np.random.default_rng(0))
    images = np.zeros((10, 4))
    handle = DatasetHandle("idx", 4, None, 0.0, images=images)
    row = evaluate(g, handle, 50)
    assert row.modes_covered == 0
    assert row.coverage_fraction == 0.0 and row.hq_fraction == 0.0
    assert np.isfinite(row.centroid_gap) and np.isfinite(row.radius_gap)
