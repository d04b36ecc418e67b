"""
End-to-end tests of the active-learning loop with the mock trainer
"""

import json
import sys
from dataclasses import replace

import pytest

from synthal.config import BudgetSection, QuerySection, RunSection
from synthal.dataset import load_dataset
from synthal.errors import SynthALError, TrainerError
from synthal.orchestrator import ActiveLoop
from synthal.trainers import ExternalTrainer


@pytest.fixture
def layout(make_dataset):
    return load_dataset(make_dataset(n=60, n_test=5))


def files_under(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_loop_spends_budget_and_synthesizes(layout, toy_config, tmp_path):
    """60 images at 50%: 15 random, then 5 per iteration, two Type-1 samples each"""
    loop = ActiveLoop(toy_config, layout, tmp_path / "run", seed=7)
    reports = loop.run()

    assert [r.iteration for r in reports] == [0, 1, 2, 3]
    assert [r.labeled for r in reports] == [15, 20, 25, 30]
    assert [r.unlabeled for r in reports] == [45, 40, 35, 30]
    assert all(r.failures == [] for r in reports)
    assert [r.synthetic_generated for r in reports] == [30, 10, 10, 10]
    assert reports[-1].synthetic_total == 60

    for report in reports[1:]:
        assert report.strategy == "bald"
        assert len(report.selected) == 5
        assert set(report.scores) == set(report.selected)
        ranked = [report.scores[i] for i in report.selected]
        assert ranked == sorted(ranked, reverse=True)

    run = tmp_path / "run"
    assert len(list((run / "stacks" / "iter_01").glob("*.pmap"))) == 45
    assert len(list((run / "stacks" / "iter_03").glob("*.pmap"))) == 35
    final = json.loads((run / "manifests" / "train_final.json").read_text())
    kinds = [e["kind"] for e in final["train"]]
    assert kinds.count("real") == 30
    assert kinds.count("synthetic") == 60
    assert final["predict"] == []

    synthetic = (run / "synthetic" / "manifest.jsonl").read_text().splitlines()
    assert len(synthetic) == 60
    first = json.loads(synthetic[0])
    assert first["provenance"]["synth_type"] == "type1"
    assert first["provenance"]["iteration"] == 0

    pools = json.loads((run / "pools" / "iter_03.json").read_text())
    assert len(pools["labeled"]) == 30
    assert not set(pools["labeled"]) & {f"img{i:03d}" for i in range(60, 65)}


def test_run_is_reproducible_across_worker_counts(layout, toy_config, tmp_path):
    """Same seed, one or three workers: byte-identical reports, manifests and images"""
    threaded = replace(toy_config, run=RunSection(seed=7, workers=3))
    ActiveLoop(toy_config, layout, tmp_path / "a", seed=7).run()
    ActiveLoop(threaded, layout, tmp_path / "b", seed=7).run()

    for sub in ("reports", "pools", "manifests", "synthetic", "stacks"):
        a = files_under(tmp_path / "a" / sub)
        b = files_under(tmp_path / "b" / sub)
        assert a.keys() == b.keys()
        assert a == b, sub


def test_different_seeds_differ(layout, toy_config, tmp_path):
    first = ActiveLoop(toy_config, layout, tmp_path / "a", seed=1).bootstrap()
    second = ActiveLoop(toy_config, layout, tmp_path / "b", seed=2).bootstrap()
    assert first.random_selected != second.random_selected


def test_labels_are_only_read_once_revealed(layout, toy_config, tmp_path):
    loop = ActiveLoop(toy_config, layout, tmp_path / "run", seed=7)
    loop.run()
    accessed = set(loop.state.oracle.access_log)
    assert accessed
    assert accessed <= loop.state.labeled
    assert not accessed & loop.state.unlabeled


def test_random_strategy_ignores_scores(layout, toy_config, tmp_path):
    config = replace(toy_config, query=QuerySection(strategy="random"))
    reports = ActiveLoop(config, layout, tmp_path / "run", seed=7).run()
    assert all(r.scores == {} for r in reports)
    assert [len(r.selected) for r in reports[1:]] == [5, 5, 5]


def test_inpainted_type2_with_multi_blend(layout, toy_config, tmp_path):
    """No external backgrounds: Type-2 samples sit on inpainted frames, two blends each"""
    synthesis = replace(
        toy_config.synthesis,
        type1_per_query=0,
        type2_per_query=1,
        multi_blend=2,
        external_backgrounds=False,
        background_inpainting=True,
    )
    config = replace(toy_config, synthesis=synthesis)
    loop = ActiveLoop(config, layout, tmp_path / "run", seed=7)
    report = loop.bootstrap()

    inpaint_failures = [f for f in report.failures if f["stage"] == "inpaint"]
    assert report.backgrounds_added + len(inpaint_failures) == 15
    assert report.synthetic_generated == 2 * report.backgrounds_added
    for record in loop.state.synthetic:
        assert record.provenance["synth_type"] == "type2"
        assert record.provenance["blend_kind"] in ("average", "gaussian")
        assert record.provenance["source_original_id"] != record.provenance["source_instrument_id"]
    assert (tmp_path / "run" / "backgrounds" / "manifest.jsonl").is_file()


def test_type1_never_reuses_its_own_background(layout, toy_config, tmp_path):
    """Type-1 samples sit on backgrounds inpainted from some other frame"""
    synthesis = replace(
        toy_config.synthesis,
        type1_per_query=1,
        type2_per_query=0,
        external_backgrounds=False,
        background_inpainting=True,
    )
    config = replace(toy_config, synthesis=synthesis)
    loop = ActiveLoop(config, layout, tmp_path / "run", seed=7)
    report = loop.bootstrap()

    assert report.backgrounds_added >= 2
    assert report.synthetic_generated == 15
    assert not [f for f in report.failures if f["stage"] == "type1"]
    for record in loop.state.synthetic:
        provenance = record.provenance
        assert provenance["synth_type"] == "type1"
        background = loop.state.backgrounds.get(provenance["source_background_id"])
        assert provenance["source_instrument_id"] not in background.source_ids


def test_type1_skips_when_only_own_background_exists(make_dataset, toy_config, tmp_path):
    """A single labeled frame has nothing but its own background to paste onto"""
    layout = load_dataset(make_dataset(n=2))
    synthesis = replace(
        toy_config.synthesis,
        type1_per_query=1,
        type2_per_query=0,
        external_backgrounds=False,
        background_inpainting=True,
    )
    config = replace(toy_config, synthesis=synthesis,
                     budget=BudgetSection(fraction=0.5, al_iterations=0))
    report = ActiveLoop(config, layout, tmp_path / "run", seed=7).bootstrap()

    assert report.labeled == 1
    assert report.synthetic_generated == 0
    assert [f["stage"] for f in report.failures if f["stage"] == "type1"] == ["type1"]


def test_type2_records_original_and_donor(layout, toy_config, tmp_path):
    """Single-blend Type-2 samples keep the original frame and donor apart in provenance"""
    synthesis = replace(
        toy_config.synthesis,
        type1_per_query=0,
        type2_per_query=1,
        external_backgrounds=False,
        background_inpainting=True,
    )
    config = replace(toy_config, synthesis=synthesis)
    loop = ActiveLoop(config, layout, tmp_path / "run", seed=7)
    report = loop.bootstrap()

    assert report.synthetic_generated == report.backgrounds_added > 0
    for record in loop.state.synthetic:
        provenance = record.provenance
        assert provenance["synth_type"] == "type2"
        background = loop.state.backgrounds.get(provenance["source_background_id"])
        assert background.source_ids[0] == provenance["source_original_id"]
        assert provenance["source_instrument_id"] != provenance["source_original_id"]


def test_full_budget_is_one_synthesis_pass(layout, toy_config, tmp_path):
    config = replace(toy_config, budget=BudgetSection(fraction=1.0, al_iterations=3))
    loop = ActiveLoop(config, layout, tmp_path / "run", seed=7)
    reports = loop.run()
    assert len(reports) == 1
    assert reports[0].labeled == 60
    assert reports[0].unlabeled == 0


def test_iteration_needs_bootstrap(layout, toy_config, tmp_path):
    loop = ActiveLoop(toy_config, layout, tmp_path / "run", seed=7)
    with pytest.raises(SynthALError):
        loop.run_iteration(1)
    loop.bootstrap()
    with pytest.raises(SynthALError):
        loop.run_iteration(4)


def test_trainer_failure_stops_the_run(layout, toy_config, tmp_path):
    failing = ExternalTrainer(f'"{sys.executable}" -c "import sys; sys.exit(4)"',
                              committee_size=2, retries=0)
    loop = ActiveLoop(toy_config, layout, tmp_path / "run", seed=7, trainer=failing)
    loop.bootstrap()
    with pytest.raises(TrainerError) as excinfo:
        loop.run_iteration(1)
    assert excinfo.value.returncode == 4
