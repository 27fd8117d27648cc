import random
from datetime import datetime, timedelta, timezone

import pytest

from yardtwin.errors import (
    AddressOutOfRange,
    DuplicateContainer,
    FloatingPlacement,
    NotTopmost,
    SlotEmpty,
    SlotOccupied,
    UnknownContainer,
)
from yardtwin.model import BlockSpec, ContainerRecord, SlotAddress, YardLayout, YardState

T0 = datetime(2024, 3, 1, 8, 0, tzinfo=timezone.utc)


def rec(cid):
    return ContainerRecord(container_id=cid, arrival_time=T0)


@pytest.fixture
def stack3():
    # 1 bay x 1 row x 3 tiers
    return YardState(YardLayout([BlockSpec("Z", 1, 1, 3, 6.0, 3.0)]))


def slot(tier, block="Z"):
    return SlotAddress(block, 1, 1, tier)


class TestPlace:
    def test_place_on_empty_stack(self, stack3):
        stack3.place(rec("C1"), slot(1))
        assert stack3.occupancy[slot(1)] == "C1"
        assert stack3.containers["C1"].current_slot == slot(1)

    def test_floating_placement_rejected(self, stack3):
        stack3.place(rec("C1"), slot(1))
        with pytest.raises(FloatingPlacement):
            stack3.place(rec("C2"), slot(3))

    def test_occupied_slot_rejected(self, stack3):
        stack3.place(rec("C1"), slot(1))
        stack3.place(rec("C2"), slot(2))
        with pytest.raises(SlotOccupied):
            stack3.place(rec("C3"), slot(2))

    def test_duplicate_container_rejected(self, stack3):
        stack3.place(rec("C1"), slot(1))
        with pytest.raises(DuplicateContainer):
            stack3.place(rec("C1"), slot(2))

    def test_address_out_of_range(self, stack3):
        with pytest.raises(AddressOutOfRange):
            stack3.place(rec("C1"), slot(4))
        with pytest.raises(AddressOutOfRange):
            stack3.place(rec("C1"), SlotAddress("Z", 2, 1, 1))
        with pytest.raises(AddressOutOfRange):
            stack3.place(rec("C1"), SlotAddress("Q", 1, 1, 1))

    def test_clock_unchanged(self, stack3):
        stack3.clock = T0
        stack3.place(rec("C1"), slot(1))
        assert stack3.clock == T0

    def test_reentry_after_departure_allowed(self, stack3):
        stack3.place(rec("C1"), slot(1))
        stack3.remove(slot(1))
        stack3.place(rec("C1"), slot(1))
        assert stack3.in_yard("C1")


class TestRemove:
    def test_remove_single(self, stack3):
        stack3.place(rec("C1"), slot(1))
        record = stack3.remove(slot(1))
        assert record.container_id == "C1"
        assert record.current_slot is None
        assert stack3.occupancy == {}

    def test_remove_below_rejected(self, stack3):
        stack3.place(rec("C1"), slot(1))
        stack3.place(rec("C2"), slot(2))
        with pytest.raises(NotTopmost):
            stack3.remove(slot(1))

    def test_remove_topmost(self, stack3):
        stack3.place(rec("C1"), slot(1))
        stack3.place(rec("C2"), slot(2))
        assert stack3.remove(slot(2)).container_id == "C2"

    def test_remove_empty(self, stack3):
        with pytest.raises(SlotEmpty):
            stack3.remove(slot(1))


class TestQueries:
    def test_blocking_count(self, stack3):
        for i, cid in enumerate(["C1", "C2", "C3"], start=1):
            stack3.place(rec(cid), slot(i))
        assert stack3.blocking_count("C1") == 2
        assert stack3.blocking_count("C2") == 1
        assert stack3.blocking_count("C3") == 0

    def test_blocking_count_unknown(self, stack3):
        with pytest.raises(UnknownContainer):
            stack3.blocking_count("NOPE")
        stack3.place(rec("C1"), slot(1))
        stack3.remove(slot(1))
        with pytest.raises(UnknownContainer):
            stack3.blocking_count("C1")  # departed

    def test_stack_heights(self, layout_a):
        state = YardState(layout_a)
        assert state.stack_heights("A", 1) == [0, 0, 0]
        state.place(rec("C1"), SlotAddress("A", 1, 2, 1))
        state.place(rec("C2"), SlotAddress("A", 1, 2, 2))
        assert state.stack_heights("A", 1) == [0, 2, 0]

    def test_stack_heights_bad_bay(self, layout_a):
        with pytest.raises(AddressOutOfRange):
            YardState(layout_a).stack_heights("A", 99)

    def test_heights_conserve_count(self, layout_a):
        state = YardState(layout_a)
        rng = random.Random(4)
        for i in range(20):
            slots = [
                SlotAddress("A", bay, row, state.stack_height("A", bay, row) + 1)
                for bay in range(1, 9)
                for row in range(1, 4)
                if state.stack_height("A", bay, row) < 3
            ]
            state.place(rec(f"X{i}"), slots[rng.randrange(len(slots))])
        total = sum(sum(state.stack_heights("A", bay)) for bay in range(1, 9))
        assert total == state.container_count() == 20


class TestInvariantProperties:
    def test_random_legal_sequences_keep_invariants(self, layout_a):
        rng = random.Random(1234)
        state = YardState(layout_a)
        placed = 0
        for step in range(600):
            tops = [state.top_slot(*s.stack) for s in set(state.occupancy)]
            tops = sorted(set(tops))
            if tops and rng.random() < 0.45:
                state.remove(tops[rng.randrange(len(tops))])
            else:
                frees = [
                    SlotAddress("A", bay, row, state.stack_height("A", bay, row) + 1)
                    for bay in range(1, 9)
                    for row in range(1, 4)
                    if state.stack_height("A", bay, row) < 3
                ]
                if not frees:
                    continue
                placed += 1
                state.place(rec(f"C{placed}"), frees[rng.randrange(len(frees))])
            state.check_invariants()
            # gravity + bijection: blocking_count consistent with heights
            for cid, record in state.containers.items():
                if record.current_slot is not None:
                    h = state.stack_height(*record.current_slot.stack)
                    assert state.blocking_count(cid) == h - record.current_slot.tier

    def test_place_then_remove_restores_occupancy(self, layout_a):
        state = YardState(layout_a)
        state.place(rec("C1"), SlotAddress("A", 2, 2, 1))
        before = dict(state.occupancy)
        state.place(rec("C2"), SlotAddress("A", 2, 2, 2))
        state.remove(SlotAddress("A", 2, 2, 2))
        assert state.occupancy == before


class TestSlotAddress:
    def test_wire_format_round_trip(self):
        s = SlotAddress("A", 5, 3, 2)
        assert str(s) == "A.05.3.2"
        assert SlotAddress.parse("A.05.3.2") == s

    def test_wide_bay(self):
        assert str(SlotAddress("B", 123, 1, 1)) == "B.123.1.1"
        assert SlotAddress.parse("B.123.1.1").bay == 123

    @pytest.mark.parametrize("bad", ["A.5.3.2", "A.05.3", "A.05.3.2.1", "", "A..1.1", "A.xx.1.1"])
    def test_rejects_bad_grammar(self, bad):
        with pytest.raises(ValueError):
            SlotAddress.parse(bad)


class TestLayout:
    def test_duplicate_block_rejected(self):
        with pytest.raises(ValueError):
            YardLayout([BlockSpec("A", 1, 1, 1, 1.0, 1.0), BlockSpec("A", 2, 2, 2, 1.0, 1.0)])

    def test_positive_counts_and_pitches(self):
        with pytest.raises(ValueError):
            BlockSpec("A", 0, 1, 1, 1.0, 1.0)
        with pytest.raises(ValueError):
            BlockSpec("A", 1, 1, 1, 0.0, 1.0)

    def test_dict_round_trip(self, demo_layout):
        again = YardLayout.from_dict(demo_layout.to_dict())
        assert again.to_dict() == demo_layout.to_dict()


class TestSnapshots:
    def test_snapshot_schema(self, stack3):
        stack3.clock = T0
        stack3.place(rec("C1"), slot(1))
        snap = stack3.snapshot_dict()
        assert set(snap) == {"clock", "blocks", "containers"}
        assert snap["clock"] == "2024-03-01T08:00:00Z"
        assert snap["blocks"][0]["block_id"] == "Z"
        assert snap["blocks"][0]["bays"][0]["bay"] == 1
        assert snap["blocks"][0]["bays"][0]["rows"][0] == {"row": 1, "stack": ["C1"]}
        assert snap["containers"]["C1"]["current_slot"] == "Z.01.1.1"

    def test_copy_is_isolated(self, stack3):
        stack3.place(rec("C1"), slot(1))
        snap = stack3.copy()
        stack3.place(rec("C2"), slot(2))
        stack3.containers["C1"].rehandle_count += 1
        assert snap.container_count() == 1
        assert snap.containers["C1"].rehandle_count == 0

    def test_dwell_rounding(self):
        record = ContainerRecord("C1", arrival_time=T0)
        assert record.dwell_days(T0 + timedelta(days=2, hours=7)) == 2.3
