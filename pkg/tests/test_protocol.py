"""End-to-end protocol runs through the compiled workflow, plus the party-level building blocks."""
from collections import Counter

import numpy as np
import pytest

from src.agents.alice_agent import AliceAgent, alice1_prepare, alice_encode, alice_pad, hop_check
from src.agents.announcement import AnnouncementBoard, fold_entries
from src.agents.bob_agent import BobAgent, announce_and_measure, bob_check, complete_blocks, distribute, extract_keys
from src.agents.photon import Photon
from src.attacks.campaigns import expected_efficiency
from src.config.schema import ProtocolConfig
from src.graph.workflow import run_protocol
from src.quantum.core import IDENTITY, OpCode
from src.quantum.labels import ALL_LABELS, EncodingRecord, StateLabel, combined_label, sifted_basis
from src.utils.errors import ConfigurationError


def honest_bobs(cfg, rng):
    """Honest Alices encode without decoys; the Bobs receive Alice m's output."""
    alices = {i: AliceAgent(i) for i in range(1, cfg.m + 1)}
    uids = iter(range(10**6, 2 * 10**6))
    photons = alices[1].prepare(cfg, rng)
    for i in range(2, cfg.m + 1):
        photons = alices[i].encode(photons, cfg, rng, uids)
    bobs = [BobAgent(l) for l in range(cfg.n)]
    for bob, positions in zip(bobs, distribute(photons, cfg.n)):
        bob.receive(positions, cfg.memory_mode, rng)
    return AnnouncementBoard(alices), bobs, len(photons) // cfg.n


class TestHonestRuns:

    @pytest.mark.parametrize("m", [2, 3, 5])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_keys_agree_without_errors(self, m, n):
        for seed in range(12):
            report = run_protocol(ProtocolConfig(m=m, n=n, N=200, seed=seed))
            assert not report.aborted
            assert report.per_hop_error_rates == [0.0] * (m - 1)
            assert report.bob_check_error_rate == 0.0
            assert report.final_check_error_rate == 0.0
            assert report.key_length > 0
            assert report.bob_xor_key == report.alice_combined_bits

    def test_same_seed_is_reproducible(self, small_config):
        first = run_protocol(small_config).model_dump_json()
        second = run_protocol(small_config).model_dump_json()
        assert first == second

    def test_different_seeds_differ(self):
        a = run_protocol(ProtocolConfig(N=100, seed=1))
        b = run_protocol(ProtocolConfig(N=100, seed=2))
        assert a.bob_xor_key != b.bob_xor_key

    def test_decoys_and_padding_are_discarded(self):
        cfg = ProtocolConfig(m=3, n=3, N=100, decoy_counts=[7, 5], seed=3)
        report = run_protocol(cfg)
        assert not report.aborted
        assert report.bob_xor_key == report.alice_combined_bits
        assert report.photons_per_bob * 3 >= report.sifted_count

    def test_stage_tallies_recorded(self, small_config):
        report = run_protocol(small_config)
        assert set(report.stage_tallies) == {"hop2", "hop3", "bob", "final"}
        assert all(t.errors == 0 for t in report.stage_tallies.values())

    def test_empty_run_has_no_key(self):
        report = run_protocol(ProtocolConfig(m=2, n=2, N=0))
        assert not report.aborted
        assert report.key_length == 0
        assert report.efficiency is None
        assert report.usable_fraction is None

    def test_quantum_memory_uses_every_signal(self, small_config):
        assert run_protocol(small_config).usable_fraction == 1.0

    def test_measure_immediately_keeps_a_third(self):
        cfg = ProtocolConfig(m=2, n=1, N=40000, memory_mode="measure_immediately", seed=11)
        report = run_protocol(cfg)
        assert not report.aborted
        assert report.usable_fraction == pytest.approx(1 / 3, abs=0.01)
        assert report.bob_xor_key == report.alice_combined_bits

    def test_quantum_memory_efficiency_near_check_losses(self):
        cfg = ProtocolConfig(m=2, n=1, N=5000, seed=5)
        report = run_protocol(cfg)
        assert report.efficiency == pytest.approx(expected_efficiency(cfg, 1.0), abs=0.03)
        assert report.efficiency >= (1 - cfg.check_fraction_bob) * (1 - cfg.check_fraction_final) - 0.03

    @pytest.mark.parametrize("n", [2, 3])
    def test_efficiency_does_not_shrink_with_more_bobs(self, n):
        cfg = ProtocolConfig(m=2, n=n, N=6000, seed=5)
        report = run_protocol(cfg)
        target = (1 - cfg.check_fraction_bob) * (1 - cfg.check_fraction_final)
        assert expected_efficiency(cfg, 1.0) == pytest.approx(target)
        assert report.efficiency == pytest.approx(target, abs=0.02)

    def test_bad_pauli_weights_rejected(self):
        with pytest.raises(ConfigurationError):
            run_protocol(ProtocolConfig(pauli_weights=[1.0, 0.0, 1.0]))


class TestParties:

    def test_prepare_records_ledger(self, rng):
        cfg = ProtocolConfig(n=2, N=10)
        alice = AliceAgent(1)
        photons = alice1_prepare(cfg, rng, alice)
        assert len(photons) == 20
        assert all(alice.ledger[p.uid] == p.label for p in photons)

    def test_prepared_labels_are_uniform(self, rng):
        cfg = ProtocolConfig(N=100000)
        counts = Counter(p.label for p in alice1_prepare(cfg, rng))
        expected = cfg.N / 6
        sigma = np.sqrt(cfg.N * (1 / 6) * (5 / 6))
        assert set(counts) == set(ALL_LABELS)
        for label in ALL_LABELS:
            assert abs(counts[label] - expected) <= 3 * sigma

    def test_encode_index_range(self, rng):
        cfg = ProtocolConfig(m=3)
        with pytest.raises(ConfigurationError):
            alice_encode(1, [], cfg, rng)
        with pytest.raises(ConfigurationError):
            alice_encode(4, [], cfg, rng)

    def test_forced_identity_keeps_labels(self, rng):
        cfg = ProtocolConfig(m=2, N=30)
        photons = alice1_prepare(cfg, rng)
        before = [p.label for p in photons]
        out, a, b = alice_encode(2, photons, cfg, rng, forced_op=IDENTITY)
        assert [p.label for p in out] == before
        assert a == [0] * 30 and b == [0] * 30

    def test_encode_matches_label_algebra(self, rng):
        cfg = ProtocolConfig(m=2, N=30)
        photons = alice1_prepare(cfg, rng)
        before = [p.label for p in photons]
        out, a, b = alice_encode(2, photons, cfg, rng)
        for label, photon, pauli, rot in zip(before, out, a, b):
            assert photon.label == combined_label(label, EncodingRecord([pauli], [rot]))

    def test_decoys_inserted(self, rng):
        cfg = ProtocolConfig(m=2, N=30, decoy_counts=[4])
        photons = alice1_prepare(cfg, rng)
        out, _, _ = alice_encode(2, photons, cfg, rng)
        assert len(out) == 34
        assert sum(p.is_decoy for p in out) == 4

    def test_padding_completes_multiple(self, rng):
        alice = AliceAgent(3)
        photons = [Photon(uid=i, label=StateLabel(0, 0)) for i in range(10)]
        out = alice_pad(alice, photons, 4, rng, iter(range(100, 200)))
        assert len(out) == 12
        assert sum(p.is_padding for p in out) == 2

    def test_distribute_requires_even_split(self):
        photons = [Photon(uid=i) for i in range(5)]
        with pytest.raises(ValueError):
            distribute(photons, 2)
        parts = distribute(photons[:4], 2)
        assert [pos for pos, _ in parts[1]] == [1, 3]

    def test_bob_check_consumes_whole_blocks(self, rng):
        cfg = ProtocolConfig(m=2, n=3, N=300, check_fraction_bob=0.3)
        board, bobs, blocks = honest_bobs(cfg, rng)
        outcome = bob_check(bobs, board, cfg, rng, blocks)
        assert not outcome.aborted
        assert outcome.error_rate == 0.0
        checked = 0
        for j in range(blocks):
            present = [j * 3 + l in bobs[l].photons for l in range(3)]
            assert all(present) or not any(present)
            checked += not any(present)
        assert checked > 0
        assert outcome.tally.sampled == 3 * checked

    def test_hop_check_receiver_range(self, rng):
        cfg = ProtocolConfig(m=2)
        board = AnnouncementBoard({1: AliceAgent(1), 2: AliceAgent(2)})
        with pytest.raises(ConfigurationError):
            hop_check(1, [], board, cfg, rng)

    def test_extract_keys_xors_blocks(self):
        bits = [{0: 1, 2: 0}, {1: 1, 3: 1}]
        key, ref = extract_keys(bits, [0, 1], {0: 1, 1: 1, 2: 1, 3: 1})
        assert key == "01"
        assert ref == "00"


class TestAnnouncements:

    def test_fold_order(self):
        label = StateLabel(0, 0)
        op = OpCode(1, 1)
        assert fold_entries({1: label, 2: op}) == combined_label(label, EncodingRecord([1], [1]))

    def test_fold_without_origin(self):
        assert fold_entries({2: OpCode(0, 0)}) is None

    def test_fold_rejects_label_after_origin(self):
        assert fold_entries({1: StateLabel(0, 0), 2: StateLabel(1, 1)}) is None
        assert fold_entries({}) is None

    def test_board_basis_matches_label_algebra(self, rng):
        cfg = ProtocolConfig(m=3, N=20)
        alices = {i: AliceAgent(i) for i in (1, 2, 3)}
        uids = iter(range(1000, 2000))
        photons = alices[1].prepare(cfg, rng)
        photons = alices[3].encode(alices[2].encode(photons, cfg, rng, uids), cfg, rng, uids)
        board = AnnouncementBoard(alices)
        for photon in photons:
            origin = alices[1].ledger[photon.uid]
            record = EncodingRecord.from_ops([alices[2].ledger[photon.uid], alices[3].ledger[photon.uid]])
            assert board.sifted_basis(photon.uid, rng) == sifted_basis(record, origin.basis_trit)

    def test_query_recovers_label(self, rng):
        cfg = ProtocolConfig(m=3, N=20)
        alices = {i: AliceAgent(i) for i in (1, 2, 3)}
        photons = alices[1].prepare(cfg, rng)
        photons = alices[2].encode(photons, cfg, rng, iter(range(1000, 2000)))
        board = AnnouncementBoard(alices)
        for photon in photons:
            assert board.query(photon.uid, 2, rng) == photon.label
            assert int(board.sifted_basis(photon.uid, rng)) == photon.label.basis_trit

    def test_unknown_photon_is_refused(self, rng):
        board = AnnouncementBoard({1: AliceAgent(1)})
        assert board.query(99, 1, rng) is None
        assert board.refusals == 1

    def test_missing_origin_record_leaves_bits_uniform(self, rng):
        cfg = ProtocolConfig(m=3, N=4000)
        alices = {i: AliceAgent(i) for i in (1, 2, 3)}
        uids = iter(range(10**6, 2 * 10**6))
        photons = alices[1].prepare(cfg, rng)
        photons = alices[2].encode(photons, cfg, rng, uids)
        photons = alices[3].encode(photons, cfg, rng, uids)
        agree = []
        for photon in photons:
            entries = {i: alices[i].ledger[photon.uid] for i in (1, 2, 3)}
            true = fold_entries(entries)
            entries[1] = StateLabel(int(rng.integers(2)), entries[1].basis_trit)
            agree.append(fold_entries(entries).bit == true.bit)
        assert sum(agree) / len(agree) == pytest.approx(0.5, abs=0.03)

    def test_withheld_bob_leaves_key_uniform(self, rng):
        cfg = ProtocolConfig(m=3, n=2, N=3000)
        board, bobs, blocks = honest_bobs(cfg, rng)
        announce_and_measure(bobs, board, cfg.memory_mode, rng)
        complete = complete_blocks(bobs, blocks)
        key, _ = extract_keys([bob.bits for bob in bobs], complete)
        agree = [bobs[0].bits[2 * j] == int(bit) for j, bit in zip(complete, key)]
        assert len(agree) == cfg.N
        assert sum(agree) / len(agree) == pytest.approx(0.5, abs=0.03)
