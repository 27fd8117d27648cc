import pytest

from yardtwin.errors import MalformedLine, MissingRequiredField, UnknownEventKind
from yardtwin.events import EventKind, parse_log, validate_against
from yardtwin.model import BlockSpec, SlotAddress, YardLayout

GATE_IN = '{"ts":"2024-03-01T08:15:00Z","kind":"GATE_IN","container":"C1","to":"A.01.1.1"}'


class TestParse:
    def test_empty_stream(self):
        assert len(parse_log(b"")) == 0
        assert len(parse_log("\n\n")) == 0

    def test_single_event(self):
        log = parse_log(GATE_IN)
        [e] = log.events
        assert e.kind is EventKind.GATE_IN
        assert e.container_id == "C1"
        assert e.to_slot == SlotAddress("A", 1, 1, 1)
        assert e.seq == 0

    def test_equal_timestamps_keep_file_order(self):
        lines = (
            '{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"B1","to":"A.01.1.1"}\n'
            '{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"B2","to":"A.01.2.1"}\n'
        )
        log = parse_log(lines)
        assert [e.container_id for e in log] == ["B1", "B2"]

    def test_out_of_order_input_is_sorted(self):
        lines = (
            '{"ts":"2024-03-01T09:00:00Z","kind":"GATE_IN","container":"LATE","to":"A.01.1.1"}\n'
            '{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"EARLY","to":"A.01.2.1"}\n'
        )
        log = parse_log(lines)
        assert [e.container_id for e in log] == ["EARLY", "LATE"]
        assert [e.seq for e in log] == [0, 1]

    def test_missing_required_field(self):
        with pytest.raises(MissingRequiredField) as err:
            parse_log('{"ts":"2024-03-01T08:15:00Z","kind":"GATE_IN","container":"C1"}')
        assert err.value.field == "to"
        assert err.value.line_no == 1

    def test_forbidden_field(self):
        with pytest.raises(MalformedLine):
            parse_log(
                '{"ts":"2024-03-01T08:15:00Z","kind":"GATE_IN","container":"C1",'
                '"from":"A.01.1.1","to":"A.01.1.2"}'
            )

    def test_crane_pos_has_no_container(self):
        with pytest.raises(MalformedLine):
            parse_log('{"ts":"2024-03-01T08:15:00Z","kind":"CRANE_POS","equipment":"R1","container":"C1","to":"A.01.1.1"}')

    def test_unknown_kind(self):
        with pytest.raises(UnknownEventKind):
            parse_log('{"ts":"2024-03-01T08:15:00Z","kind":"TELEPORT","container":"C1"}')

    def test_malformed_json_carries_line_number(self):
        with pytest.raises(MalformedLine) as err:
            parse_log(GATE_IN + "\n{nope\n")
        assert err.value.line_no == 2

    def test_bad_slot_string(self):
        with pytest.raises(MalformedLine):
            parse_log('{"ts":"2024-03-01T08:15:00Z","kind":"GATE_IN","container":"C1","to":"A-1-1-1"}')

    def test_bad_timestamp(self):
        with pytest.raises(MalformedLine):
            parse_log('{"ts":"yesterday","kind":"GATE_IN","container":"C1","to":"A.01.1.1"}')

    def test_unknown_top_level_keys_preserved_in_attrs(self):
        log = parse_log(
            '{"ts":"2024-03-01T08:15:00Z","kind":"GATE_IN","container":"C1","to":"A.01.1.1",'
            '"custom_flag":7,"attrs":{"iso_type":"22G1"}}'
        )
        assert log.events[0].attrs == {"custom_flag": 7, "iso_type": "22G1"}

    def test_determinism(self, golden_log_file):
        raw = golden_log_file.read_bytes()
        assert parse_log(raw) == parse_log(raw)

    def test_round_trip(self, golden_log_file):
        log = parse_log(golden_log_file.read_bytes())
        assert parse_log(log.to_jsonl()) == log

    def test_round_trip_out_of_order_and_synthetic(self):
        lines = (
            '{"ts":"2024-03-01T09:00:00Z","kind":"YARD_SHIFT","container":"X","from":"A.01.1.2","to":"A.01.2.1","synthetic":true}\n'
            '{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"X","to":"A.01.1.1","note":"hi"}\n'
        )
        log = parse_log(lines)
        assert log.events[1].synthetic is True
        assert parse_log(log.to_jsonl()) == log


class TestWindow:
    def test_window_inclusive(self, golden_log):
        t0 = golden_log.events[2].ts
        t1 = golden_log.events[5].ts
        picked = golden_log.window(t0, t1)
        assert [e.seq for e in picked] == [2, 3, 4, 5]

    def test_before(self, golden_log):
        t = golden_log.events[3].ts
        assert [e.seq for e in golden_log.before(t)] == [0, 1, 2]


class TestValidate:
    def test_golden_log_is_clean(self, golden_log, layout_a):
        assert validate_against(golden_log, layout_a) == []

    def test_unknown_retrieval(self, layout_a):
        log = parse_log('{"ts":"2024-03-01T08:00:00Z","kind":"GATE_OUT","container":"GHOST","from":"A.01.1.1"}')
        [v] = validate_against(log, layout_a)
        assert v.code == "UNKNOWN_CONTAINER_RETRIEVAL"
        assert v.seq == 0

    def test_out_of_range_slot(self, layout_a):
        log = parse_log('{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"C1","to":"A.01.1.9"}')
        violations = validate_against(log, layout_a)
        assert any(v.code == "ADDRESS_OUT_OF_RANGE" and v.seq == 0 for v in violations)

    def test_floating_placement_flagged_at_seq(self, layout_a):
        lines = (
            '{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"C1","to":"A.01.1.1"}\n'
            '{"ts":"2024-03-01T08:01:00Z","kind":"GATE_IN","container":"C2","to":"A.01.2.3"}\n'
        )
        violations = validate_against(parse_log(lines), layout_a)
        assert [(v.seq, v.code) for v in violations] == [(1, "FLOATING_PLACEMENT")]

    def test_empty_log_replayable(self, layout_a):
        assert validate_against(parse_log(""), layout_a) == []


def test_tier9_on_short_layout():
    layout = YardLayout([BlockSpec("A", 2, 2, 5, 6.5, 2.9)])
    log = parse_log('{"ts":"2024-03-01T08:00:00Z","kind":"GATE_IN","container":"C1","to":"A.01.1.9"}')
    violations = validate_against(log, layout)
    assert violations and violations[0].code == "ADDRESS_OUT_OF_RANGE"
