import math

import numpy as np
import pytest

import seqmon._kernels as K
from seqmon.calibration import (
    CalibrationEntry,
    CalibrationTable,
    LimitGrid,
    TableFormatError,
    ThresholdFamily,
    _grid_arrays,
    _simulate_sups,
    _want_mask,
    calibrate,
    calibrate_grid,
    load_table,
    save_table,
    simulate_brownian,
    simulate_limit_path,
)
from seqmon.detectors import DetectorKind


def test_threshold_family_shapes():
    assert ThresholdFamily.T1.shape(0.7) == 1.0
    assert ThresholdFamily.T2.shape(1.0) == 4.0
    t = 0.5
    want = (t + 1) ** 2 * math.sqrt(t / (t + 1))
    assert ThresholdFamily.T3.shape(t) == pytest.approx(want, rel=1e-12)
    assert ThresholdFamily.T3.shape(0.0) == 1e-10  # floor at the origin
    for fam in ThresholdFamily:
        ts = np.linspace(0, 3, 50)
        vals = [fam.shape(t) for t in ts]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_brownian_bridge_field_zeros():
    grid = LimitGrid(steps_per_unit=50, replicates=1, seed=0, p=2, T=1.0)
    rng = np.random.default_rng(12)
    for _ in range(5):
        w = simulate_brownian(grid, rng)
        rvals = np.arange(grid.n_points) / grid.steps_per_unit
        for idx in (0, 25, 50, 75, 100):
            s = rvals[idx]
            b_ss = s * w[idx] - s * w[idx]
            np.testing.assert_array_equal(b_ss, np.zeros(2))
            b_0t = rvals[idx] * w[0] - 0.0 * w[idx]
            np.testing.assert_array_equal(b_0t, np.zeros(2))
        assert np.all(w[0] == 0.0)


def test_bridge_variance_at_1_2():
    # Var(B(s,t)) = s t (t - s): equals 2 at (s, t) = (1, 2)
    grid = LimitGrid(steps_per_unit=80, replicates=1, seed=0, p=1, T=1.0)
    rng = np.random.default_rng(77)
    n = 20000
    vals = np.empty(n)
    i1, i2 = 80, 160
    for r in range(n):
        w = simulate_brownian(grid, rng)
        vals[r] = 2.0 * w[i1, 0] - 1.0 * w[i2, 0]
    var = vals.var()
    se = math.sqrt(2.0 / n) * 2.0
    assert abs(var - 2.0) <= 3 * se


def test_simulate_limit_path_degenerate_horizon():
    grid = LimitGrid(steps_per_unit=40, replicates=1, seed=0, p=1, T=0.0)
    v = simulate_limit_path(DetectorKind.D, grid, np.random.default_rng(5))
    assert v == 0.0


def test_sn_limit_sups_finite_nonnegative():
    grid = LimitGrid(steps_per_unit=60, replicates=64, seed=21, p=2, T=1.0)
    sups = _simulate_sups([DetectorKind.DSN, DetectorKind.PSN], grid)
    for kind_idx in (3, 4):
        block = sups[:, kind_idx, :]
        assert np.isfinite(block).all()
        assert (block >= 0.0).all()


def test_calibrate_alpha_one_is_zero():
    grid = LimitGrid(steps_per_unit=30, replicates=50, seed=3, p=1, T=1.0)
    entry = calibrate(DetectorKind.D, 1, 1.0, ThresholdFamily.T1, 1.0, grid)
    assert entry.c_alpha == 0.0


def test_calibrate_monotone_in_alpha():
    entries = calibrate_grid(["D"], 1, 1.0, [0.01, 0.05, 0.10], 4000, 100, 11)
    get = lambda a: entries[CalibrationTable.key("D", 1, 1.0, "T1", a)].c_alpha
    assert get(0.01) > get(0.05) > get(0.10) > 0


def test_simulation_invariant_to_batching():
    grid = LimitGrid(steps_per_unit=50, replicates=37, seed=123, p=1, T=1.0)
    a = _simulate_sups([DetectorKind.D], grid, batch=8)
    b = _simulate_sups([DetectorKind.D], grid, batch=64)
    np.testing.assert_array_equal(a, b)


def test_self_consistency_two_seeds():
    g1 = LimitGrid(steps_per_unit=200, replicates=10000, seed=1, p=1, T=1.0)
    g2 = LimitGrid(steps_per_unit=200, replicates=10000, seed=2, p=1, T=1.0)
    c1 = calibrate(DetectorKind.D, 1, 1.0, ThresholdFamily.T1, 0.05, g1).c_alpha
    c2 = calibrate(DetectorKind.D, 1, 1.0, ThresholdFamily.T1, 0.05, g2).c_alpha
    assert abs(c1 - c2) / c1 < 0.05


def test_rejection_rate_at_calibrated_constant():
    reps = 20000
    entry = calibrate(
        DetectorKind.D, 1, 1.0, ThresholdFamily.T1, 0.05,
        LimitGrid(steps_per_unit=200, replicates=reps, seed=5, p=1, T=1.0),
    )
    fresh = _simulate_sups(
        [DetectorKind.D], LimitGrid(200, reps, 6, 1, 1.0)
    )[:, 0, 0]
    rate = float(np.mean(fresh > entry.c_alpha))
    assert abs(rate - 0.05) <= 0.01


def test_grid_refinement_nested_paths():
    """Coarse grids under-estimate suprema: on nested paths the fine-grid
    constant dominates, c(2000) >= 0.98 c(500)."""
    fine_steps, factor, reps = 2000, 4, 1500
    fine = LimitGrid(fine_steps, reps, 9, 1, 1.0)
    rvals_f, i1_f, dt_f, c1_f, c2_f, w0_f = _grid_arrays(fine)
    coarse = LimitGrid(fine_steps // factor, reps, 9, 1, 1.0)
    rvals_c, i1_c, dt_c, c1_c, c2_c, w0_c = _grid_arrays(coarse)
    want = _want_mask([DetectorKind.D])
    sup_f = np.empty(reps)
    sup_c = np.empty(reps)
    for start in range(0, reps, 250):
        stop = min(start + 250, reps)
        incs = np.empty((stop - start, fine.n_points - 1, 1))
        for idx in range(start, stop):
            incs[idx - start] = np.random.default_rng([9, idx]).standard_normal(
                (fine.n_points - 1, 1)
            )
        # coarse increments: grouped sums rescaled to unit variance
        grouped = incs.reshape(stop - start, -1, factor, 1).sum(axis=2) / math.sqrt(
            factor
        )
        out_f = K.limit_sups_batch(incs, rvals_f, i1_f, want, w0_f, c1_f, c2_f, dt_f)
        out_c = K.limit_sups_batch(
            grouped, rvals_c, i1_c, want, w0_c, c1_c, c2_c, dt_c
        )
        sup_f[start:stop] = out_f[:, 0, 0]
        sup_c[start:stop] = out_c[:, 0, 0]
    k0 = math.ceil(0.95 * reps) - 1
    c_f = np.sort(sup_f)[k0]
    c_c = np.sort(sup_c)[k0]
    assert c_f >= 0.98 * c_c
    # per-path domination up to fp reassociation noise
    assert np.all(sup_f >= sup_c - 1e-9)


def test_table_roundtrip_and_format(tmp_path):
    table = CalibrationTable()
    table.put("D", 1, 1.0, "T1", 0.05, CalibrationEntry(2.5, 0.01, 100, 10, 7))
    table.put("Q", 2, 4.92, "T3", 0.01, CalibrationEntry(7.25, 0.1, 200, 20, 8))
    table.put("PSN", 6, 2.0, "T2", 0.10, CalibrationEntry(0.125, 0.0, 300, 30, 9))
    path = tmp_path / "table.tsv"
    save_table(table, path)
    loaded = load_table(path)
    assert loaded == table
    # bit-identical persistence
    again = tmp_path / "again.tsv"
    save_table(loaded, again)
    assert path.read_bytes() == again.read_bytes()
    # one record per entry
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 2 + len(table)


def test_table_wrong_magic(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("#%something-else 9\nkind\n")
    with pytest.raises(TableFormatError):
        load_table(path)


def test_table_missing_key_message():
    table = CalibrationTable()
    with pytest.raises(KeyError, match="kind=D"):
        table.c_alpha("D", 1, 1.0, "T1", 0.05)


def test_key_canonicalization():
    k1 = CalibrationTable.key("D", 1, 1.0000000001, "T1", 0.05)
    k2 = CalibrationTable.key(DetectorKind.D, 1, 1.0, ThresholdFamily.T1, 0.05)
    assert k1 == k2


def test_shipped_table_covers_documented_grid():
    from seqmon.calibration import default_table

    table = default_table()
    for kind in DetectorKind:
        for p in (1, 2, 3, 6):
            for T in (1.0, 2.0, 3.0, 4.92):
                for fam in ThresholdFamily:
                    cs = [
                        table.c_alpha(kind, p, T, fam, alpha)
                        for alpha in (0.01, 0.05, 0.10)
                    ]
                    assert cs[0] > cs[1] > cs[2] > 0, (kind, p, T, fam)
    assert len(table) == 5 * 4 * 4 * 3 * 3
