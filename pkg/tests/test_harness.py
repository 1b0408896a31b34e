import json
import os

import numpy as np
import pytest

from gyrosim import harness
from gyrosim.harness import ExperimentConfig, ScanError, derive_seed, render_husimi, run_single, scan
from gyrosim.observables import HusimiGrid, ObservableSeries


def small(**kw):
    base = dict(n_q=4, target=5, epsilons=(0.01,), modes=("ideal", "static"), realizations=2, base_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_defaults_resolved():
    cfg = ExperimentConfig(n_q=11).resolved()
    assert cfg.iterations == 105 and cfg.swaps_per_event == 6
    assert cfg.fit_window == (35.0, 175.0)
    assert cfg.sigma == pytest.approx(12.766, rel=1e-3)


def test_config_parses_strings():
    cfg = ExperimentConfig.from_mapping({"n_q": "5", "epsilons": "0.001, 0.002", "l_g": "1,10",
                                         "modes": "static,gyqec", "slice_after_swaps": "yes"})
    assert cfg.n_q == 5 and cfg.epsilons == (0.001, 0.002) and cfg.l_g == (1, 10)
    assert cfg.modes == ("static", "gyqec") and cfg.slice_after_swaps is True


def test_config_text_round_trip():
    cfg = small(l_g=(1, 5), fit_window=(2.0, 8.0)).resolved()
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg


def test_config_file_comments_and_errors():
    cfg = ExperimentConfig.from_text("# comment\nn_q = 6  # trailing\n\ntarget=3\n")
    assert cfg.n_q == 6 and cfg.target == 3
    with pytest.raises(ValueError):
        ExperimentConfig.from_text("n_q 6\n")
    with pytest.raises(ValueError):
        ExperimentConfig.from_text("bogus=1\n")


@pytest.mark.parametrize("kw", [
    {"n_q": 1}, {"target": 16}, {"iterations": 0}, {"epsilons": ()}, {"epsilons": (-0.1,)},
    {"modes": ("static", "nope")}, {"l_g": (0,)}, {"realizations": 0}, {"topology": "star"},
    {"sigma": -1.0}, {"fit_window": (5.0, 2.0)}, {"workers": 0}, {"swaps_per_event": 0},
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        small(**kw).resolved()


def test_config_hash_ignores_default_materialization():
    assert small().config_hash() == small(iterations=9).config_hash()
    assert small().config_hash() != small(target=6).config_hash()


def test_derived_seeds_distinct_and_stable():
    seeds = {derive_seed(7, r, s) for r in range(50) for s in range(2)}
    assert len(seeds) == 100
    assert derive_seed(7, 3, 1) == derive_seed(7, 3, 1)
    assert derive_seed(7, 3, 1) != derive_seed(8, 3, 1)


def test_run_single_ideal_n_q_2():
    res = run_single(ExperimentConfig(n_q=2, modes=("ideal",), iterations=1))
    assert res["ideal"].w_G[1] == pytest.approx(1.0, abs=1e-12)


def test_run_single_ideal_n_q_11():
    s = run_single(ExperimentConfig(n_q=11, modes=("ideal",), iterations=100))["ideal"]
    assert s.argmax_w_G() == 35 and s.max_w_G() >= 0.999


def test_run_single_writes_tables_and_manifest(tmp_path):
    cfg = small(modes=("ideal", "static", "fluctuating", "gate_angle", "gyqec"), l_g=(2,), output_dir=str(tmp_path))
    res = run_single(cfg)
    assert set(res) == {"ideal", "static_eps0.01", "fluctuating_eps0.01", "gate_angle_eps0.01", "gyqec_eps0.01_lg2"}
    text = (tmp_path / "series_static_eps0.01.tsv").read_text()
    assert "# n_q=4" in text and "t\tw_G\tw_4\tfidelity\tnorm_error" in text
    back = ObservableSeries.from_table(text)
    assert np.array_equal(back.w_G, res["static_eps0.01"].w_G)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config_hash"] == cfg.config_hash()
    assert sorted(manifest["outputs"]) == sorted(f"series_{k}.tsv" for k in res)


def test_unwritable_output_fails_before_running(tmp_path, monkeypatch):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    called = []
    monkeypatch.setattr(harness, "_execute", lambda *a: called.append(1))
    with pytest.raises(OSError):
        run_single(small(output_dir=str(blocker / "sub")))
    assert not called


def test_scan_single_cell_equals_run_single():
    cfg = small(modes=("static",), realizations=1)
    one = run_single(cfg)["static_eps0.01"]
    row = scan(cfg).row("static", 0.01)
    assert row["max_w_G"] == one.max_w_G()


def test_scan_is_bit_reproducible(tmp_path):
    outs = []
    for sub in ("a", "b"):
        cfg = small(modes=("static", "gyqec"), l_g=(1, 3), output_dir=str(tmp_path / sub))
        scan(cfg)
        files = {}
        for name in os.listdir(tmp_path / sub):
            if name != "manifest.json":
                # the echoed header names the (different) output directory
                lines = (tmp_path / sub / name).read_text().splitlines()
                files[name] = [ln for ln in lines if not ln.startswith("# output_dir=")]
        outs.append(files)
    assert outs[0] == outs[1]


def test_scan_parallel_matches_serial():
    cfg = small(modes=("static", "gyqec"), l_g=(1,))
    a = scan(cfg)
    b = scan(small(modes=("static", "gyqec"), l_g=(1,), workers=2))
    assert [r["max_w_G"] for r in a.rows] == [r["max_w_G"] for r in b.rows]


def test_scan_adds_baseline_and_gain():
    res = scan(small(modes=("gyqec",), l_g=(1, 4)))
    base = res.row("static", 0.01)["max_w_G"]
    for lg in (1, 4):
        row = res.row("gyqec", 0.01, lg)
        assert row["gain"] == pytest.approx(row["max_w_G"] / base)
    table = res.to_table().splitlines()
    assert table[0].split("\t") == list(harness.SUMMARY_COLUMNS) and len(table) == 4


def test_scan_realizations_share_disorder_across_cells():
    res = scan(small(modes=("static", "gyqec"), l_g=(1,), realizations=3))
    keys = [k for k in res.manifest.seeds if k.endswith("_r1")]
    assert len({res.manifest.seeds[k] for k in keys}) == 1


def test_scan_fluctuating_rate_ratio():
    # fluctuating couplings: fitted w_4 decay rate quadruples when eps doubles
    cfg = ExperimentConfig(n_q=6, epsilons=(0.002, 0.004), modes=("fluctuating",), realizations=4,
                           iterations=30, base_seed=1)
    res = scan(cfg)
    ratio = res.row("fluctuating", 0.004)["Gamma_w4"] / res.row("fluctuating", 0.002)["Gamma_w4"]
    assert ratio == pytest.approx(4, rel=0.25)


def test_scan_failure_names_seed(monkeypatch):
    def boom(cfg, job, snapshots=None):
        raise FloatingPointError("nan")
    monkeypatch.setattr(harness, "_run_job", boom)
    with pytest.raises(ScanError, match="seed"):
        scan(small())


def test_scan_requires_seed():
    with pytest.raises(ValueError):
        scan(small(base_seed=None))


def test_render_husimi_files(tmp_path):
    cfg = small(n_q=5, target=9, epsilons=(0.002,), l_g=(1,), n_theta=16, n_x=32, output_dir=str(tmp_path))
    grids = render_husimi(cfg)
    assert set(grids) == {"ideal", "static_eps0.002", "gyqec_eps0.002_lg1"}
    grid, t = grids["ideal"]
    assert t == 4 and grid.row_mass_fraction(9) > 0.9
    text = (tmp_path / f"husimi_ideal_t{t}.txt").read_text()
    np.testing.assert_allclose(HusimiGrid.from_text(text).grid, grid.grid, rtol=1e-9)
    assert (tmp_path / f"husimi_ideal_t{t}.pgm").read_bytes().startswith(b"P5\n16 32\n255\n")


def test_render_husimi_fixed_time():
    grids = render_husimi(small(n_q=4, epsilons=(0.001,), l_g=(1,)), t_star=2)
    assert all(t == 2 for _, t in grids.values())
    with pytest.raises(ValueError):
        render_husimi(small(n_q=4, iterations=5), t_star=6)
