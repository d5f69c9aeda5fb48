"""Falsification harness: verdicts, witnesses, determinism."""

import json

import pytest

from smr_axioms import (
    AXIOMS,
    Cohort,
    ExternalStandard,
    built_in_measures,
    matches_expected_matrix,
    replay,
    run_audit,
)
from smr_axioms.audit import (
    PairProbe,
    ProbeGenerator,
    World,
    check_case_mix_insensitivity,
    check_dominance,
    check_equivalence,
    check_scale_insensitivity,
    check_strict_monotonicity,
    mandatory_probes,
)
from smr_axioms.errors import EmptyProbeSetError, IncomparableProbeError
from smr_axioms.report import (
    dumps,
    matrix_payload,
    witness_from_payload,
    witness_payload,
)

REGISTRY = built_in_measures()
SMALL_TRIALS = 300


@pytest.fixture(scope="module")
def matrix():
    return run_audit(seed=0, trials=SMALL_TRIALS)


class TestBuiltinMatrix:
    def test_expected_pattern(self, matrix):
        assert matrix.row("smr-external").statuses() == (
            "holds", "violated", "holds", "violated", "violated",
        )
        assert matrix.row("smr-internal").statuses() == ("violated",) * 5
        assert matches_expected_matrix(matrix)

    def test_five_verdicts_in_canonical_order(self, matrix):
        for row in matrix.rows:
            assert tuple(v.axiom for v in row.verdicts) == AXIOMS

    def test_every_violation_carries_a_witness(self, matrix):
        for row in matrix.rows:
            for verdict in row.verdicts:
                if verdict.status == "violated":
                    assert verdict.witness is not None
                else:
                    assert verdict.witness is None
                    assert verdict.trials >= SMALL_TRIALS

    def test_witnesses_replay_exactly(self, matrix):
        for row in matrix.rows:
            measure = REGISTRY[row.measure]
            for verdict in row.verdicts:
                if verdict.witness is None:
                    continue
                before, after = replay(measure, verdict.witness)
                assert before == verdict.witness.value_before
                assert after == verdict.witness.value_after

    def test_witnesses_replay_through_json(self, matrix):
        for row in matrix.rows:
            measure = REGISTRY[row.measure]
            for verdict in row.verdicts:
                if verdict.witness is None:
                    continue
                payload = json.loads(dumps(witness_payload(verdict.witness)))
                rebuilt = witness_from_payload(payload)
                before, after = replay(measure, rebuilt)
                assert before == verdict.witness.value_before
                assert after == verdict.witness.value_after

    def test_known_witness_values(self, matrix):
        dominance = matrix.row("smr-external").verdicts[4].witness
        assert dominance.value_before == pytest.approx(1.1, abs=1e-12)
        assert dominance.value_after == pytest.approx(1.0, abs=1e-12)
        equivalence = matrix.row("smr-external").verdicts[3].witness
        assert equivalence.value_before == pytest.approx(0.8, abs=1e-12)
        assert equivalence.value_after == pytest.approx(0.875, abs=1e-12)
        internal_dom = matrix.row("smr-internal").verdicts[4].witness
        assert internal_dom.value_before == pytest.approx(1.135135135135135, abs=1e-9)
        assert internal_dom.value_after == pytest.approx(1.05993690851735, abs=1e-9)

    def test_internal_monotonicity_witness_decreases(self, matrix):
        witness = matrix.row("smr-internal").verdicts[0].witness
        assert witness.value_after < witness.value_before
        assert witness.perturbation["delta"] > 0.0


class TestDeterminism:
    def test_same_seed_same_matrix(self):
        a = run_audit(seed=7, trials=50)
        b = run_audit(seed=7, trials=50)
        assert dumps(matrix_payload(a)) == dumps(matrix_payload(b))

    def test_pattern_stable_across_seeds(self):
        for seed in (1, 2, 3):
            assert matches_expected_matrix(run_audit(seed=seed, trials=50))


class TestDegenerateMeasures:
    def test_constant_measure(self):
        matrix = run_audit([REGISTRY["constant"]], seed=0, trials=SMALL_TRIALS)
        row = matrix.row("constant")
        # insensitive to everything, so only monotonicity and dominance
        # (which needs a strictly better rank) can fail
        assert row.statuses() == ("violated", "holds", "holds", "holds", "violated")

    def test_actual_rate_measure(self):
        matrix = run_audit([REGISTRY["actual-rate"]], seed=0, trials=SMALL_TRIALS)
        row = matrix.row("actual-rate")
        statuses = dict(zip(AXIOMS, row.statuses()))
        assert statuses["strict_monotonicity"] == "holds"
        assert statuses["case_mix_insensitivity"] == "violated"
        assert statuses["scale_insensitivity"] == "holds"

    def test_user_measures_appended_after_builtins(self):
        matrix = run_audit([REGISTRY["constant"]], seed=0, trials=20)
        assert [r.measure for r in matrix.rows] == ["smr-external", "smr-internal", "constant"]


class TestChecks:
    def test_empty_probe_set(self):
        with pytest.raises(EmptyProbeSetError):
            check_strict_monotonicity(REGISTRY["smr-external"], [])
        with pytest.raises(EmptyProbeSetError):
            check_dominance(REGISTRY["smr-external"], [])

    def test_incomparable_dominance_probe(self):
        world = World(
            Cohort.build({"A": {"1": (5.0, 0.1)}, "B": {"2": (5.0, 0.2)}}),
            ExternalStandard({"1": 0.1, "2": 0.1}),
        )
        probe = PairProbe(world, "A", "B", "dominates")
        with pytest.raises(IncomparableProbeError):
            check_dominance(REGISTRY["smr-external"], [probe])

    def test_misdeclared_equivalence_probe(self):
        world = World(
            Cohort.build({"A": {"1": (5.0, 0.1)}, "B": {"1": (5.0, 0.4)}}),
            ExternalStandard({"1": 0.1}),
        )
        probe = PairProbe(world, "A", "B", "identical-rates")
        with pytest.raises(IncomparableProbeError):
            check_equivalence(REGISTRY["smr-external"], [probe])

    def test_non_dominant_pair_rejected(self):
        world = World(
            Cohort.build({"A": {"1": (5.0, 0.3)}, "B": {"1": (5.0, 0.2)}}),
            ExternalStandard({"1": 0.1}),
        )
        probe = PairProbe(world, "A", "B", "dominates")
        with pytest.raises(IncomparableProbeError):
            check_dominance(REGISTRY["smr-external"], [probe])

    def test_case_mix_check_finds_nothing_for_constant(self):
        probes = mandatory_probes("case_mix_insensitivity", "external")
        verdict = check_case_mix_insensitivity(REGISTRY["constant"], probes)
        assert verdict.status == "holds"
        assert verdict.trials == len(probes)

    def test_scale_check_respects_tolerance(self):
        probes = mandatory_probes("scale_insensitivity", "external")
        verdict = check_scale_insensitivity(REGISTRY["smr-external"], probes)
        assert verdict.status == "holds"


class TestMandatoryProbes:
    def test_external_case_mix_witness_is_the_known_world(self, matrix):
        witness = matrix.row("smr-external").verdicts[1].witness
        table = witness.world.cohort.table("H1")
        assert table.count("1") == 20.0 and table.count("2") == 0.0 and table.count("3") == 5.0
        assert witness.perturbation == {"from_stratum": "1", "to_stratum": "2", "eta": 5.0}

    def test_internal_scale_witness_factor_two(self, matrix):
        witness = matrix.row("smr-internal").verdicts[2].witness
        assert witness.perturbation == {"factor": 2.0}
        assert witness.value_before == pytest.approx(1.4678899082568808, abs=1e-9)
        assert witness.value_after == pytest.approx(1.2883435582822086, abs=1e-9)

    def test_internal_dominance_pair_is_comparable(self, matrix):
        # the supplied empty-stratum rate makes the internal pair comparable
        witness = matrix.row("smr-internal").verdicts[4].witness
        dominant = witness.world.cohort.table(witness.hospital)
        assert dominant.count("1") == 0.0
        assert dominant.rate("1") == 1.0


class TestProbeGenerator:
    def test_streams_are_reproducible(self):
        def take(seed, axiom, scheme, n=5):
            gen = ProbeGenerator(seed)
            stream = gen.stream(axiom, scheme)
            return [next(stream) for _ in range(n)]

        for axiom in AXIOMS:
            for scheme in ("external", "internal"):
                a = take(42, axiom, scheme)
                b = take(42, axiom, scheme)
                assert a == b

    def test_generated_probes_are_valid(self):
        gen = ProbeGenerator(3)
        measure = REGISTRY["smr-external"]
        verdict = check_strict_monotonicity(
            measure, (next(gen.stream("strict_monotonicity", "external")) for _ in range(200))
        )
        assert verdict.status == "holds"
