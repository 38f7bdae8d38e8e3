import json
import math

import pandas as pd
import pytest

from lattice import SymmetricRetentionRule, delta_state, evolve
from market_data import load_returns_csv, log_returns
from pde import AdvectionDiffusionParams, GridConfig, solve_advection_diffusion
from writers import write_grid, write_json, write_lattice_state, write_return_series


def test_returns_file_reads_back(tmp_path, fixture_prices):
    r = log_returns(fixture_prices)
    path = write_return_series(r, tmp_path / 'nested' / 'returns.csv')
    loaded = load_returns_csv(path)

    assert path.read_text().splitlines()[0] == 'date,value'
    assert loaded.values.index.equals(r.values.index)
    assert loaded.to_numpy() == pytest.approx(r.to_numpy(), rel=1e-15)


def test_lattice_state_file(tmp_path):
    state = evolve(delta_state(), SymmetricRetentionRule(0.5), 3)
    frame = pd.read_csv(write_lattice_state(state, tmp_path / 'lattice.csv'))

    assert list(frame.columns) == ['position', 'mass']
    assert frame['mass'].sum() == pytest.approx(1.0, abs=1e-15)
    assert frame['position'].tolist() == [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]


def test_grid_slices_and_sidecar(tmp_path):
    grid = solve_advection_diffusion(
        AdvectionDiffusionParams(0.0, 0.5),
        GridConfig(dx=0.05, dt=1e-3, t_end=0.1, n_snapshots=3),
    )
    written = write_grid(grid, tmp_path / 'density', stem='heat')

    assert [p.name for p in written] == ['heat_t0.csv', 'heat_t1.csv', 'heat_t2.csv', 'heat.json']
    sidecar = json.loads(written[-1].read_text())
    assert sidecar['times'] == pytest.approx([0.0, 0.05, 0.1])
    assert sidecar['params'] == {'D': 0.0, 'V': 0.5}
    first = pd.read_csv(written[0])
    assert list(first.columns) == ['x', 'density']


def test_json_writer_rejects_nan(tmp_path):
    with pytest.raises(ValueError):
        write_json({'value': math.nan}, tmp_path / 'bad.json')
