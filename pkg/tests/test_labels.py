from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.quantum.core import ALL_OPCODES, IDENTITY, OpCode, make_state
from src.quantum.labels import (
    ALL_LABELS,
    EncodingRecord,
    StateLabel,
    combined_label,
    nearest_label,
    op_on_label,
    sifted_basis,
    solve_ops,
)

labels = st.sampled_from(ALL_LABELS)
records = st.integers(min_value=0, max_value=6).flatmap(
    lambda k: st.builds(
        EncodingRecord,
        st.lists(st.integers(0, 2), min_size=k, max_size=k),
        st.lists(st.integers(0, 2), min_size=k, max_size=k),
    )
)


def test_label_validation():
    with pytest.raises(ValueError):
        StateLabel(2, 0)
    with pytest.raises(ValueError):
        StateLabel(0, 3)


def test_record_lengths_must_match():
    with pytest.raises(ValueError):
        EncodingRecord([0, 1], [0])


def test_nearest_label_recovers_every_state():
    for label in ALL_LABELS:
        assert nearest_label(make_state(label)) == label


def test_every_operation_permutes_the_six_states():
    for op in ALL_OPCODES:
        images = {op_on_label(op, label) for label in ALL_LABELS}
        assert images == set(ALL_LABELS)


def test_identity_fixes_labels():
    for label in ALL_LABELS:
        assert op_on_label(IDENTITY, label) == label


def test_rotation_shifts_basis_and_pauli_keeps_it():
    for op in ALL_OPCODES:
        for label in ALL_LABELS:
            assert op_on_label(op, label).basis_trit == (label.basis_trit + op.rot) % 3


def test_pauli_codes_flip_bits_as_expected():
    # sigma1 flips Z and X eigenstates, sigma2 flips X and Y eigenstates
    flips = {(p, b): op_on_label(OpCode(p, 0), StateLabel(0, b)).bit for p in range(3) for b in range(3)}
    assert flips == {
        (0, 0): 0, (0, 1): 0, (0, 2): 0,
        (1, 0): 1, (1, 1): 1, (1, 2): 0,
        (2, 0): 0, (2, 1): 1, (2, 2): 1,
    }


@given(labels, records)
def test_sifted_basis_is_basis_of_combined_label(initial, rec):
    assert combined_label(initial, rec).basis == sifted_basis(rec, initial.basis_trit)


@given(labels, records)
def test_combined_label_is_left_fold(initial, rec):
    expected = initial
    for op in rec.ops():
        expected = op_on_label(op, expected)
    assert combined_label(initial, rec) == expected


def test_empty_record_keeps_label():
    for label in ALL_LABELS:
        assert combined_label(label, EncodingRecord()) == label


def test_from_ops_round_trip():
    ops = [OpCode(1, 2), OpCode(0, 1), OpCode(2, 0)]
    assert EncodingRecord.from_ops(ops).ops() == ops


def test_solve_ops_partitions_the_nine_operations():
    for prefix in ALL_LABELS:
        counts = Counter()
        for target in ALL_LABELS:
            candidates = solve_ops(prefix, target)
            assert candidates
            for op in candidates:
                assert op_on_label(op, prefix) == target
            counts[target] = len(candidates)
        assert sum(counts.values()) == len(ALL_OPCODES)
