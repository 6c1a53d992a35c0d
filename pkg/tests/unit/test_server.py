"""Unit tests for the edge server event loop and experiment drivers."""

import pytest

from crosscam.detsim import DetectionLog, NoiseModel, save_log
from crosscam.exceptions import EmptyInputError, ScenarioError, SchemaError
from crosscam.server import (
    FRAME_UPLOAD,
    STATE_SHARE,
    Message,
    RunMode,
    RunReport,
    Scenario,
    ServerParams,
    compare_modes,
    compute_accuracy,
    prepare_run,
    run_collaborative,
    run_isolated,
    run_knowledge_sharing,
    run_scenario,
    simulate,
    sweep_knowledge_sharing,
)
from crosscam.topology import VALIDATION_ACCURACY, TopologyParams
from crosscam.trust import TrustParams

from tests.helpers import make_box, make_camera, static_scene


class TestAccuracy:
    """Test the counting accuracy metric."""

    def test_exact(self):
        assert compute_accuracy([(3, 3), (0, 0)]) == 1.0

    def test_relative_error(self):
        """Test the error relative to the true count."""
        assert compute_accuracy([(17, 18)]) == pytest.approx(1.0 - 1.0 / 18.0)

    def test_empty_truth(self):
        """Test that over-counting an empty room is clamped at zero."""
        assert compute_accuracy([(2, 0)]) == 0.0
        assert compute_accuracy([(1, 0)]) == 0.0

    def test_no_frames(self):
        with pytest.raises(EmptyInputError):
            compute_accuracy([])


class TestMessagesAndModes:
    """Test message and run-mode value objects."""

    def test_message_rejects_foreign_box(self):
        with pytest.raises(SchemaError):
            Message(FRAME_UPLOAD, "1", 0, (make_box(0, 0, camera_id="2"),))

    def test_message_kind(self):
        with pytest.raises(ScenarioError):
            Message("Gossip", "1", 0)

    def test_message_order(self):
        """Test ordering by frame, then camera id numerically, then kind."""
        messages = [
            Message(STATE_SHARE, "10", 0),
            Message(STATE_SHARE, "2", 0),
            Message(FRAME_UPLOAD, "2", 0),
            Message(FRAME_UPLOAD, "1", 1),
        ]
        ordered = sorted(messages, key=Message.sort_key)
        assert [(m.frame_idx, m.camera_id, m.kind) for m in ordered] == [
            (0, "2", FRAME_UPLOAD),
            (0, "2", STATE_SHARE),
            (0, "10", STATE_SHARE),
            (1, "1", FRAME_UPLOAD),
        ]

    def test_knowledge_sharing_needs_subset(self):
        with pytest.raises(ScenarioError):
            RunMode.knowledge_sharing([])

    def test_subset_only_for_knowledge_sharing(self):
        with pytest.raises(ScenarioError):
            RunMode("isolated", ("1",))

    def test_unknown_mode(self):
        with pytest.raises(ScenarioError):
            RunMode("gossip")

    def test_label(self):
        """Test that subsets are sorted and joined into the label."""
        mode = RunMode.knowledge_sharing(["10", "2"])
        assert mode.subset == ("2", "10")
        assert mode.label == "knowledge-sharing_2-10"
        assert RunMode.collaborative().label == "collaborative"


class TestRunModes:
    """Test the three run modes on hand-checkable scenes."""

    def test_isolated(self, three_people, twin_cameras):
        """Test that every camera sends its first frame only."""
        report = run_isolated(three_people, twin_cameras)
        assert report.per_camera_fraction == {"1": 0.1, "2": 0.1}
        assert report.accuracy == 1.0
        assert report.per_frame_counts[4] == (4, 3, 3)
        assert report.clusters == [{"members": ["1", "2"], "supreme": "1"}]

    def test_collaborative_suppresses_duplicates(self, three_people, twin_cameras):
        """Test that a collaborator with nothing new stays silent."""
        report = run_collaborative(three_people, twin_cameras, collect_trace=True)
        assert report.per_camera_fraction == {"1": 0.1, "2": 0.0}
        assert report.mean_fraction == pytest.approx(0.05)
        assert report.accuracy == 1.0
        assert report.transmission_share == {"1": 1.0, "2": 0.0}
        assert [(m.kind, m.camera_id, m.frame_idx) for m in report.trace] == [
            (FRAME_UPLOAD, "1", 0)
        ]

    def test_knowledge_sharing_supreme_only(self, three_people, twin_cameras):
        report = run_knowledge_sharing(three_people, twin_cameras, ["1"])
        assert report.per_camera_fraction == {"1": 0.1}
        assert report.subset == ["1"]
        assert report.accuracy == 1.0

    def test_knowledge_sharing_trace(self, three_people, twin_cameras):
        """Test one upload plus a state share per camera per frame."""
        report = run_knowledge_sharing(three_people, twin_cameras, ["1", "2"], collect_trace=True)
        assert len(report.trace) == 21
        assert report.trace[0].kind == FRAME_UPLOAD
        assert sum(1 for m in report.trace if m.kind == STATE_SHARE) == 20
        assert report.trace == sorted(report.trace, key=Message.sort_key)

    def test_subset_must_hold_supreme(self, three_people, twin_cameras):
        with pytest.raises(ScenarioError):
            run_knowledge_sharing(three_people, twin_cameras, ["2"])

    def test_subset_unknown_camera(self, three_people, twin_cameras):
        with pytest.raises(ScenarioError):
            run_knowledge_sharing(three_people, twin_cameras, ["9"])

    def test_empty_scene(self, twin_cameras):
        """Test that an empty room is counted perfectly without traffic."""
        report = run_collaborative(static_scene([]), twin_cameras)
        assert report.accuracy == 1.0
        assert report.per_camera_fraction == {"1": 0.0, "2": 0.0}
        assert report.transmission_share == {"1": 0.0, "2": 0.0}

    def test_disjoint_cameras(self):
        """Test that cameras without overlap behave as in isolation."""
        cameras = [make_camera("1", 0.0), make_camera("2", 20.0)]
        scene = static_scene([(5.0, 4.0), (25.0, 4.0)])
        isolated = run_isolated(scene, cameras)
        collaborative = run_collaborative(scene, cameras)
        assert len(collaborative.clusters) == 2
        assert collaborative.per_camera_fraction == isolated.per_camera_fraction == {
            "1": 0.1,
            "2": 0.1,
        }
        assert collaborative.accuracy == 1.0

    def test_duplicate_camera_ids(self, three_people):
        with pytest.raises(ScenarioError):
            run_isolated(three_people, [make_camera("1"), make_camera("1")])


class TestTrust:
    """Test trust feedback against an adversarial camera."""

    @pytest.fixture
    def cameras(self):
        return [
            make_camera("1", quality=0.9),
            make_camera("2"),
            make_camera("3", adversarial=True),
        ]

    @pytest.fixture
    def params(self):
        return ServerParams(trust=TrustParams(enabled=True))

    def test_adversary_is_gated(self, cameras, params):
        """Test that mirrored boxes cost three frames before the camera is gated."""
        scene = static_scene([(2.0, 2.0), (3.0, 5.0), (2.5, 6.5)], n_frames=20)
        report = run_knowledge_sharing(scene, cameras, ["1", "2", "3"], params)
        assert report.trust_events == {"3": 2}
        assert [p for _, p, _ in report.per_frame_counts[:4]] == [6, 6, 6, 3]
        assert report.accuracy == pytest.approx(0.85)
        assert report.accuracy_between(3) == 1.0
        assert report.trust_snapshot["3"] < 0.4
        assert report.trust_snapshot["1"] > 0.5
        assert report.to_dict()["trust_labels"]["3"] == "Extremely harmful"

    def test_subset_without_adversary(self, cameras, params):
        scene = static_scene([(2.0, 2.0), (3.0, 5.0), (2.5, 6.5)], n_frames=20)
        report = run_knowledge_sharing(scene, cameras, ["1", "2"], params)
        assert report.accuracy == 1.0
        assert report.trust_events == {}

    def test_trust_disabled_leaves_snapshot_empty(self, three_people, twin_cameras):
        report = run_isolated(three_people, twin_cameras)
        assert report.trust_snapshot == {}
        assert report.to_dict()["trust_labels"] == {}


class TestPreparation:
    """Test stream preparation and supreme calibration."""

    def test_validation_accuracy_picks_best_detector(self, three_people):
        """Test that calibration overrules the static quality score."""
        cameras = [
            make_camera("1", quality=0.9, noise=NoiseModel(miss_prob=0.99)),
            make_camera("2", quality=0.5),
        ]
        static = prepare_run(three_people, cameras, ServerParams(), seed=0)
        assert static.clusters[0].supreme == "1"
        params = ServerParams(topology=TopologyParams(supreme_mode=VALIDATION_ACCURACY))
        calibrated = prepare_run(three_people, cameras, params, seed=0)
        assert calibrated.clusters[0].supreme == "2"

    def test_validation_accuracy_tie(self, three_people, twin_cameras):
        """Test that equal accuracies go to the lowest id."""
        params = ServerParams(topology=TopologyParams(supreme_mode=VALIDATION_ACCURACY))
        prepared = prepare_run(three_people, list(reversed(twin_cameras)), params, seed=0)
        assert prepared.clusters[0].supreme == "1"

    def test_ground_truth_is_union_of_views(self):
        """Test that people seen by several cameras count once."""
        cameras = [make_camera("1", 0.0), make_camera("2", 5.0)]
        scene = static_scene([(1.0, 4.0), (7.0, 4.0), (14.0, 4.0)], n_frames=3)
        prepared = prepare_run(scene, cameras, ServerParams(), seed=0)
        assert prepared.ground_truth == [3, 3, 3]

    def test_workers_do_not_change_results(self, three_people, noisy_model):
        """Test that parallel preparation gives the same report."""
        cameras = [
            make_camera("1", quality=0.9, noise=noisy_model),
            make_camera("2", noise=noisy_model),
        ]
        serial = prepare_run(three_people, cameras, ServerParams(), seed=4)
        parallel = prepare_run(three_people, cameras, ServerParams(), seed=4, workers=2)
        mode = RunMode.collaborative()
        assert simulate(serial, mode) == simulate(parallel, mode)

    def test_ingested_detections(self, temp_dir, three_people):
        """Test that a camera can replay a recorded log instead of synthesizing one."""
        path = temp_dir / "2.detections.jsonl"
        save_log(DetectionLog("2", [[] for _ in range(10)]), path)
        cameras = [make_camera("1", quality=0.9), make_camera("2", detections_file=path)]
        prepared = prepare_run(three_people, cameras, ServerParams(), seed=0)
        assert prepared.streams["2"].filter_result.transmitted == set()
        assert prepared.streams["1"].filter_result.transmitted == {0}

    def test_ingested_length_mismatch(self, temp_dir, three_people):
        path = temp_dir / "1.detections.jsonl"
        save_log(DetectionLog("1", [[]]), path)
        with pytest.raises(ScenarioError):
            prepare_run(three_people, [make_camera("1", detections_file=path)], ServerParams(), 0)


class TestExperiments:
    """Test scenario runs, sweeps and mode comparison."""

    @pytest.fixture
    def scenario(self, three_people, twin_cameras):
        return Scenario(tuple(twin_cameras), scene=three_people, n_frames=10, seed=5)

    def test_run_scenario_uses_scenario_seed(self, scenario):
        report = run_scenario(scenario, RunMode.isolated())
        assert report.seed == 5
        assert run_scenario(scenario, RunMode.isolated(), seed=8).seed == 8

    def test_report_dict_round_trip(self, scenario):
        report = run_scenario(scenario, RunMode.collaborative())
        assert RunReport.from_dict(report.to_dict()) == report

    def test_sweep(self, scenario):
        """Test one row per subset size from the supremes to every camera."""
        rows = sweep_knowledge_sharing(scenario, n_seeds=2)
        assert [r.subset_size for r in rows] == [1, 2]
        assert all(r.mean_accuracy == 1.0 and r.stddev == 0.0 for r in rows)
        assert [r.mean_fraction for r in rows] == [pytest.approx(0.1), pytest.approx(0.05)]

    def test_sweep_needs_two_cameras(self, three_people):
        scenario = Scenario((make_camera("1"),), scene=three_people)
        with pytest.raises(ScenarioError):
            sweep_knowledge_sharing(scenario, n_seeds=1)

    def test_compare(self, scenario):
        rows = compare_modes(scenario, n_seeds=2)
        assert [r.mode for r in rows] == ["isolated", "collaborative", "knowledge-sharing_1-2"]
        assert [r.mean_fraction for r in rows] == [
            pytest.approx(0.1),
            pytest.approx(0.05),
            pytest.approx(0.05),
        ]
        assert all(r.mean_accuracy == 1.0 for r in rows)

    def test_seed_count(self, scenario):
        with pytest.raises(ScenarioError):
            compare_modes(scenario, n_seeds=0)
