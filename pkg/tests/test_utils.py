import json

import numpy as np
import pytest

from data_loader import load_fit_json, load_json, load_run_config
from errors import DataIOError, DomainError, ParseError
from utils import ensure_parent, path_blocks, run_blocks, stream_rng


def test_stream_rng_is_keyed_by_seed_and_stream():
    first = stream_rng(1, 2, 0).normal(size=5)
    again = stream_rng(1, 2, 0).normal(size=5)
    other_block = stream_rng(1, 2, 1).normal(size=5)
    other_stream = stream_rng(1, 3, 0).normal(size=5)

    assert np.array_equal(first, again)
    assert not np.array_equal(first, other_block)
    assert not np.array_equal(first, other_stream)


def test_stream_rng_rejects_negative_keys():
    with pytest.raises(DomainError):
        stream_rng(-1)
    with pytest.raises(DomainError):
        stream_rng(1, -2)


def test_path_blocks_cover_every_path():
    blocks = path_blocks(10, block_size=4)
    assert blocks == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
    assert path_blocks(0) == []


def test_run_blocks_keeps_block_order():
    blocks = path_blocks(50, block_size=7)

    def work(index, start, stop):
        return list(range(start, stop))

    serial = run_blocks(work, blocks, n_jobs=1)
    threaded = run_blocks(work, blocks, n_jobs=3)
    assert serial == threaded
    assert sum(serial, []) == list(range(50))


def test_ensure_parent_creates_directories(tmp_path):
    target = ensure_parent(tmp_path / 'a' / 'b' / 'file.csv')
    assert target.parent.is_dir()
    assert not target.exists()


def test_load_json_errors(tmp_path):
    with pytest.raises(DataIOError, match='missing.json'):
        load_json(tmp_path / 'missing.json')

    broken = tmp_path / 'broken.json'
    broken.write_text('{"a": ')
    with pytest.raises(ParseError):
        load_json(broken)

    listing = tmp_path / 'list.json'
    listing.write_text('[]')
    with pytest.raises(ParseError):
        load_json(listing)


def test_run_config_accepts_dashed_keys(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'calibrate': {'n-starts': 4, 'pin_k2': False}}))

    assert load_run_config(path) == {'calibrate': {'n_starts': 4, 'pin_k2': False}}
    assert load_run_config(None) == {}


def test_run_config_sections_must_be_objects(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'calibrate': 3}))
    with pytest.raises(ParseError):
        load_run_config(path)


def test_fit_file_needs_normal_fit(tmp_path):
    path = tmp_path / 'fit.json'
    path.write_text(json.dumps({'retention_fit': {}}))
    with pytest.raises(ParseError, match='normal_fit'):
        load_fit_json(path)
