import json
from pathlib import Path

import pytest

from yardtwin.events import load_log
from yardtwin.model import BlockSpec, YardLayout

DATA = Path(__file__).parent / "data"


@pytest.fixture
def layout_a():
    """One block, 8 bays x 3 rows x 3 tiers, the golden-log geometry."""
    return YardLayout([BlockSpec("A", bay_count=8, row_count=3, max_tier=3,
                                 bay_pitch_m=6.5, row_pitch_m=2.9)])


@pytest.fixture
def demo_layout():
    """Three blocks for multi-block scenarios and strategy studies."""
    return YardLayout(
        [
            BlockSpec("A", 5, 6, 4, 6.5, 2.9),
            BlockSpec("B", 5, 6, 4, 6.5, 2.9),
            BlockSpec("C", 5, 6, 4, 6.5, 2.9),
        ]
    )


@pytest.fixture
def single_stack_layout():
    """Degenerate 1 bay x 1 row x 3 tiers — relocation is impossible here."""
    return YardLayout([BlockSpec("Z", 1, 1, 3, 6.0, 3.0)])


@pytest.fixture
def golden_log():
    return load_log(DATA / "golden12.jsonl")


@pytest.fixture
def golden_window(golden_log):
    return (golden_log.events[0].ts, golden_log.events[-1].ts)


@pytest.fixture
def layout_a_file(tmp_path, layout_a):
    path = tmp_path / "layout.json"
    path.write_text(json.dumps(layout_a.to_dict()))
    return path


@pytest.fixture
def golden_log_file():
    return DATA / "golden12.jsonl"
