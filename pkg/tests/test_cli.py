#!/usr/bin/env python3
"""
Test frame files, chart output and the command runners
"""
import sys
import os
import json
import tempfile
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pandas as pd

from cli.chart_exporter import OUTPUT_COLUMNS
from cli.commands import RunConfig, cmd_arl, cmd_calibrate, cmd_monitor, cmd_simulate
from cli.frame_io import read_frames, read_pool_values, write_frames
from core.charts import ChartConfig, ChartKind, run_chart
from core.config_manager import ConfigManager, config_manager
from core.dgp import DgpSpec, Normal, ProcessKind
from core.errors import ConfigError, NonConvergence, SchemaError, ShapeError
from core.lattice import CountGrid, RealGrid
from main import main

# keep command tests out of the shared results database
config_manager.set("store.enabled", False)

CLAY = [
    [[3.30, 3.95], [5.89, 3.20]],
    [[0.27, 3.71], [0.39, 4.33]],
    [[3.06, 1.66], [2.93, 2.12]],
    [[2.74, 2.86], [1.31, 2.10]],
    [[1.36, 3.42], [2.21, 1.80]],
    [[2.00, 2.44], [3.65, 1.64]],
]


def _tmp(name):
    return os.path.join(tempfile.mkdtemp(), name)


def _write(path, text):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    return path


def _run(**kwargs):
    kwargs.setdefault('chart', ChartConfig(ChartKind.tau_tilde(), lam=0.1, limit=0.03174))
    return RunConfig(**kwargs)


def test_frame_file_round_trip():
    rng = np.random.default_rng(0)
    frames = [RealGrid(rng.normal(size=(3, 4))) for _ in range(3)]
    for name in ('frames.csv', 'frames.ndjson'):
        path = _tmp(name)
        assert write_frames(path, frames) == 36
        stream = read_frames(path)
        assert len(stream) == 3 and stream.shape == (3, 4)
        for a, b in zip(frames, stream):
            assert np.array_equal(a.values, b.values), f"{name} must round-trip bit-exactly"

    counts = [CountGrid(rng.poisson(4, size=(2, 2))) for _ in range(2)]
    path = _tmp('counts.csv')
    write_frames(path, counts)
    assert read_frames(path).is_count
    with open(path, 'rb') as f:
        assert b'\r\n' not in f.read()
    print("[PASS] Frame file round-trip test")


def test_frame_schema_errors():
    cases = [
        ('t,s1,s2,y\n', SchemaError),
        ('', SchemaError),
        ('t,s1,s2,y\n1,0,0,1.0\n1,0,1,2.0\n1,1,0,3.0\n', SchemaError),
        ('t,s1,s2,y\n1,0,0,1.0\n1,0,0,2.0\n1,1,0,3.0\n1,1,1,4.0\n', SchemaError),
        ('t,s1,y\n1,0,1.0\n', SchemaError),
        ('t,s1,s2,y\n2,0,0,1\n2,0,1,2\n2,1,0,3\n2,1,1,4\n', SchemaError),
        ('t,s1,s2,y\n1,0,0,1\n1,0,1,2\n1,1,0,3\n1,1,1,4\n'
         '2,0,0,1\n2,0,1,2\n2,0,2,2\n2,1,0,3\n2,1,1,4\n2,1,2,4\n', ShapeError),
    ]
    for text, error in cases:
        try:
            read_frames(_write(_tmp('bad.csv'), text))
            assert False, f"Expected {error.__name__} for {text!r}"
        except error:
            pass
    print("[PASS] Frame schema error test")


def test_monitor_clay_flats():
    path = _tmp('clay.csv')
    write_frames(path, [RealGrid(f) for f in CLAY])
    out = _tmp('chart.csv')
    table = cmd_monitor(_run(chart=ChartConfig(ChartKind.tau_tilde(), lam=0.1, limit=0.1), input=path, output=out))
    assert list(table.columns) == OUTPUT_COLUMNS
    expected_p3 = [0.400, 0.360, 0.324, 0.292, 0.362, 0.426]
    assert np.allclose(np.round(table['smoothed'] + 1 / 3, 3), expected_p3)
    assert table['run'].unique().tolist() == [1] and table['t'].tolist() == [1, 2, 3, 4, 5, 6]
    written = pd.read_csv(out)
    assert written['alarm'].tolist() == table['alarm'].tolist()
    print("[PASS] Clay monitor test")


def test_monitor_noise_runs():
    rng = np.random.default_rng(4)
    path = _tmp('counts.csv')
    write_frames(path, [CountGrid(rng.poisson(2, size=(6, 6))) for _ in range(5)])
    table = cmd_monitor(_run(input=path, jitter_scale=1.0, noise_runs=4, seed=7, output=_tmp('out.csv')))
    assert table['run'].unique().tolist() == [0, 1, 2, 3, 4]
    ordered = table.sort_values(['run', 't'], kind='stable')
    assert ordered.index.tolist() == table.index.tolist(), "Rows must be ordered by (run, t)"
    runs = table[table['run'] > 0]
    mean = runs.groupby('t')['smoothed'].mean().to_numpy()
    assert np.allclose(table[table['run'] == 0]['smoothed'].to_numpy(), mean)

    again = cmd_monitor(_run(input=path, jitter_scale=1.0, noise_runs=4, seed=7, output=_tmp('again.csv')))
    assert again.equals(table), "Noise runs are reproducible from the seed"

    try:
        cmd_monitor(_run(input=path, jitter_scale=1.0, noise_runs=2))
        assert False, "Jitter noise runs need a seed"
    except ConfigError:
        pass
    print("[PASS] Noise run test")


def test_simulate_and_monitor_round_trip():
    dgp = DgpSpec.iid(Normal())
    first, second = _tmp('a.csv'), _tmp('b.csv')
    assert cmd_simulate(_run(dgp=dgp, m=2, n=2, frames=3, seed=5, output=first)) == 27
    cmd_simulate(_run(dgp=dgp, m=2, n=2, frames=3, seed=5, output=second))
    with open(first, 'rb') as a, open(second, 'rb') as b:
        assert a.read() == b.read(), "Same seed must give byte-identical files"

    sar = DgpSpec(ProcessKind.SAR, (0.2, 0.2, 0.3))
    cfg = ChartConfig(ChartKind.acf(), lam=0.1, limit=0.05)
    path = _tmp('sar.csv')
    cmd_simulate(_run(chart=cfg, dgp=sar, m=8, n=8, frames=20, seed=12, output=path))
    from_file = cmd_monitor(_run(chart=cfg, input=path, seed=12, output=_tmp('f.csv')))
    in_memory = cmd_monitor(_run(chart=cfg, dgp=sar, m=8, n=8, frames=20, seed=12, output=_tmp('m.csv')))
    assert from_file['smoothed'].tolist() == in_memory['smoothed'].tolist()

    sqinma = _tmp('sqinma.csv')
    cmd_simulate(_run(dgp=DgpSpec(ProcessKind.SQINMA, (0.5, 0.5, 0.5)), m=3, n=3, frames=2,
                      seed=1, output=sqinma))
    assert pd.api.types.is_integer_dtype(pd.read_csv(sqinma)['y'])
    print("[PASS] Simulate round-trip test")


def test_run_chart_matches_monitor():
    path = _tmp('clay.csv')
    write_frames(path, [RealGrid(f) for f in CLAY])
    cfg = ChartConfig(ChartKind.kappa_hat(), lam=0.3, limit=0.2)
    points = run_chart(cfg, [RealGrid(f) for f in CLAY])
    table = cmd_monitor(_run(chart=cfg, input=path, output=_tmp('k.csv')))
    assert table['smoothed'].tolist() == [p.smoothed for p in points]
    assert table['alarm'].astype(bool).tolist() == [p.alarm for p in points]
    print("[PASS] Chart run consistency test")


def test_source_rules():
    dgp = DgpSpec.iid(Normal())
    cases = [
        lambda: cmd_monitor(_run()),
        lambda: cmd_monitor(_run(dgp=dgp, input='x.csv', seed=1)),
        lambda: cmd_arl(_run(dgp=dgp)),
        lambda: cmd_arl(_run(chart=ChartConfig(ChartKind.tau_tilde()), dgp=dgp, seed=1)),
        lambda: cmd_simulate(_run(dgp=dgp, seed=1)),
        lambda: cmd_calibrate(_run(seed=1)),
        lambda: RunConfig(chart=ChartConfig(ChartKind.acf()), noise_runs=0),
    ]
    for case in cases:
        try:
            case()
            assert False, "Invalid run description should be rejected"
        except ConfigError:
            pass
    print("[PASS] Source rule test")


def test_arl_and_calibrate_records():
    out = _tmp('arl.json')
    estimate = cmd_arl(_run(dgp=DgpSpec.iid(Normal()), seed=3, replications=20, cap=10, workers=1, output=out))
    with open(out, encoding='utf-8') as f:
        record = json.load(f)
    assert record['cap_hits'] == estimate.cap_hits > 0 and record['replications'] == 20

    pool_out = _tmp('cal.json')
    pool = [0.0] * 19 + [1.0]
    result = cmd_calibrate(_run(chart=ChartConfig(ChartKind.tau_tilde(), lam=1.0), pool_values=pool,
                                target_arl=20.0, replications=3000, rel_tol=0.08, seed=9, workers=1,
                                output=pool_out))
    with open(pool_out, encoding='utf-8') as f:
        record = json.load(f)
    assert record['converged'] and record['limit'] == result.limit and record['iterations']

    try:
        cmd_calibrate(_run(chart=ChartConfig(ChartKind.tau_tilde(), lam=1.0), pool_values=pool,
                           target_arl=20.0, replications=200, rel_tol=0.0, seed=9, workers=1,
                           output=pool_out))
        assert False, "rel_tol = 0 cannot converge"
    except NonConvergence:
        with open(pool_out, encoding='utf-8') as f:
            assert json.load(f)['converged'] is False
    print("[PASS] ARL and calibration record test")


def test_whole_number_real_frames():
    """Integer y with a negative entry loads as a real-valued stream"""
    text = 't,s1,s2,y\n1,0,0,-1\n1,0,1,2\n1,1,0,3\n1,1,1,4\n2,0,0,0\n2,0,1,-5\n2,1,0,7\n2,1,1,1\n'
    stream = read_frames(_write(_tmp('temps.csv'), text))
    assert len(stream) == 2 and not stream.is_count
    assert all(isinstance(frame, RealGrid) for frame in stream)
    assert stream[0].values.tolist() == [[-1.0, 2.0], [3.0, 4.0]]
    assert stream[1].values.dtype == np.float64

    counts = read_frames(_write(_tmp('counts.csv'), 't,s1,s2,y\n1,0,0,0\n1,0,1,2\n1,1,0,3\n1,1,1,4\n'))
    assert counts.is_count

    table = cmd_monitor(_run(input=_write(_tmp('temps.csv'), text), output=_tmp('chart.csv')))
    assert table['t'].tolist() == [1, 2]
    print("[PASS] Whole-number real frame test")


def test_pool_value_files():
    headed = read_pool_values(_write(_tmp('pool.csv'), 'value\n0.0012\n-0.0004\n0.003\n'))
    bare = read_pool_values(_write(_tmp('pool.txt'), '0.0012\n-0.0004\n0.003\n'))
    assert headed == bare == [0.0012, -0.0004, 0.003]
    for text in ('', 'value\nabc\n'):
        try:
            read_pool_values(_write(_tmp('bad.csv'), text))
            assert False, f"{text!r} should be rejected"
        except SchemaError:
            pass
    print("[PASS] Pool value file test")


def test_run_config_from_config():
    cm = ConfigManager()
    cm.apply_override('chart.kind=tau_tilde_bp:2')
    cm.apply_override('chart.limit=0.01')
    cm.apply_override('dgp={"process": "sinar", "coefficients": [0.2, 0.2, 0.2]}')
    cm.apply_override('run.seed=4')
    run = RunConfig.from_config(cm)
    assert str(run.chart.kind) == 'tau_tilde_bp:2' and run.chart.limit == 0.01
    assert run.dgp.process is ProcessKind.SINAR and run.dgp.is_integer and run.seed == 4

    cm.apply_override('chart.lambda=2')
    try:
        RunConfig.from_config(cm)
        assert False, "lambda = 2 should be rejected"
    except ConfigError:
        pass
    print("[PASS] RunConfig test")


def test_main_exit_codes():
    dgp = _tmp('dgp.json')
    with open(dgp, 'w', encoding='utf-8') as f:
        json.dump({'dgp': {'process': 'iid', 'innovation': 'normal'}, 'store': {'enabled': False}}, f)
    out = _tmp('frames.csv')
    assert main(['simulate', '--config', dgp, '--seed', '1', '--m', '2', '--n', '2',
                 '--frames', '3', '--output', out]) == 0
    assert len(pd.read_csv(out)) == 27
    assert main(['monitor', '--input', _write(_tmp('empty.csv'), ''), '--limit', '0.1']) == 2
    assert main(['simulate', '--config', dgp, '--seed', '-1', '--m', '2', '--n', '2',
                 '--frames', '3', '--output', _tmp('neg.csv')]) == 2
    assert main(['arl', '--config', dgp, '--seed', '1', '--limit', '0.1', '--m', '2', '--n', '2',
                 '--replications', '5', '--workers', '0', '--output', _tmp('a.json')]) == 2
    assert main(['calibrate', '--config', dgp, '--seed', '1', '--set', 'pool.values=null',
                 '--kind', 'tau_tilde', '--lambda', '0.5', '--m', '3', '--n', '3',
                 '--target-arl', '5.01', '--replications', '50', '--max-evals', '1', '--rel-tol', '0',
                 '--workers', '1', '--output', _tmp('c.json')]) == 3
    print("[PASS] Exit code test")


if __name__ == "__main__":
    print("Testing command line layer...")
    test_frame_file_round_trip()
    test_frame_schema_errors()
    test_monitor_clay_flats()
    test_monitor_noise_runs()
    test_simulate_and_monitor_round_trip()
    test_run_chart_matches_monitor()
    test_source_rules()
    test_arl_and_calibrate_records()
    test_whole_number_real_frames()
    test_pool_value_files()
    test_run_config_from_config()
    test_main_exit_codes()
    print("\nAll command line tests passed!")
