"""
Active-learning loop with copy-paste synthesis

Run directory layout::

    config.yaml                       resolved configuration
    schedule.json                     budget schedule
    pools/iter_XX.json                labeled / unlabeled / synthetic / background ids
    reports/iter_XX.json              selection, scores and synthesis counts
    manifests/train_iter_XX.json      trainer input per iteration
    manifests/train_final.json        final labeled + synthetic training set
    stacks/iter_XX/<id>.pmap          committee predictions for unlabeled images
    synthetic/{images,masks}/<id>.png and synthetic/manifest.jsonl
    backgrounds/                      background pool (inpainted frames + manifest)

Iteration 0 is the random start set and its synthesis.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .config import RunConfig, dump_config
from .data_types import BackgroundImage, SynthType, SyntheticSample
from .dataset import DatasetLayout, atomic_write_text, write_image, write_json, write_jsonl, write_mask
from .errors import NoBackgroundAvailable, SynthALError
from .inpaint import acquire_background
from .pools import BudgetSchedule, PoolState, SyntheticRecord, init_pools
from .query import score_stacks, select_query_batch, select_random
from .rng import derive_rng, derive_seed
from .synthesis import generate_type2, synthesis_counts, synthesize
from .trainers import BaseTrainer, create_trainer, write_training_manifest

logger = logging.getLogger(__name__)


@dataclass
class IterationReport:
    iteration: int
    strategy: str
    selected: List[str] = field(default_factory=list)
    scores: Dict[str, float] = field(default_factory=dict)
    random_selected: List[str] = field(default_factory=list)
    labeled: int = 0
    unlabeled: int = 0
    synthetic_generated: int = 0
    synthetic_total: int = 0
    backgrounds_added: int = 0
    failures: List[Dict[str, str]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "strategy": self.strategy,
            "selected": self.selected,
            "scores": self.scores,
            "random_selected": self.random_selected,
            "labeled": self.labeled,
            "unlabeled": self.unlabeled,
            "synthetic_generated": self.synthetic_generated,
            "synthetic_total": self.synthetic_total,
            "backgrounds_added": self.backgrounds_added,
            "failures": self.failures,
        }


@dataclass
class _SynthJob:
    image_id: str
    synth_type: SynthType
    index: int
    background: Optional[BackgroundImage]
    donor_id: Optional[str] = None


class ActiveLoop:
    """
    Pool-based loop: train -> score -> query -> reveal -> inpaint -> synthesize.

    Every random choice derives from the master seed and stable keys, so the
    run does not depend on the number of workers.
    """

    def __init__(self, config: RunConfig, layout: DatasetLayout, run_dir: Path, seed: int,
                 trainer: Optional[BaseTrainer] = None):
        self.config = replace(config, run=replace(config.run, seed=seed, run_dir=str(run_dir)))
        self.layout = layout
        self.run_dir = Path(run_dir)
        self.seed = seed
        self.workers = max(1, config.run.workers)
        self.trainer = trainer or create_trainer(config.trainer, self.workers)
        budget = config.budget
        self.schedule = BudgetSchedule.build(
            len(layout.ids("train")), budget.fraction, budget.al_iterations,
            budget.initial_random_fraction, budget.random_interleave,
        )
        self.state: Optional[PoolState] = None
        self.reports: List[IterationReport] = []

    # -- paths ---------------------------------------------------------------

    def _path(self, *parts: str) -> Path:
        return self.run_dir.joinpath(*parts)

    @staticmethod
    def _tag(iteration: int) -> str:
        return f"iter_{iteration:02d}"

    # -- public API ----------------------------------------------------------

    def bootstrap(self) -> IterationReport:
        """Set up pools, reveal the random start set and synthesize from it"""
        self.run_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(self._path("config.yaml"), dump_config(self.config))
        write_json(self._path("schedule.json"), self.schedule.to_dict())

        self.state = init_pools(self.layout, self.schedule, self.seed,
                                self.config.synthesis.external_backgrounds)
        report = IterationReport(iteration=0, strategy="random",
                                 random_selected=sorted(self.state.labeled))
        if not self.schedule.active_learning:
            logger.info("budget covers %d images up front; querying disabled",
                        self.schedule.total_budget)
        self._synthesize_for(sorted(self.state.labeled), 0, report)
        return self._finish(report)

    def run_iteration(self, iteration: int) -> IterationReport:
        if self.state is None:
            raise SynthALError("bootstrap() must run before the first iteration")
        if not 1 <= iteration <= self.schedule.al_iterations:
            raise SynthALError(f"iteration {iteration} is outside the schedule")
        state = self.state
        query = self.config.query
        tag = self._tag(iteration)
        n_queried, n_random = self.schedule.picks(iteration)
        unlabeled = sorted(state.unlabeled)
        logger.info("iteration %d: %d unlabeled, querying %d (+%d random)",
                    iteration, len(unlabeled), n_queried, n_random)

        # 1. train on labeled + synthetic, predict every unlabeled image
        manifest = self._write_manifest(f"train_{tag}.json", iteration, unlabeled)
        stacks = self.trainer.run(manifest, self._path("stacks", tag),
                                  derive_seed(self.seed, "train", iteration), unlabeled)

        # 2-3. score and select
        report = IterationReport(iteration=iteration, strategy=query.strategy)
        if query.strategy == "random":
            selected = select_random(unlabeled, n_queried, derive_rng(self.seed, "query", iteration))
        else:
            scores = score_stacks(stacks, query.strategy, query.aggregator,
                                  query.top_fraction, self.workers)
            selected = select_query_batch(scores, n_queried)
            by_id = {s.image_id: s.score for s in scores}
            report.scores = {i: by_id[i] for i in selected}
        report.selected = selected
        rest = sorted(set(unlabeled) - set(selected))
        report.random_selected = select_random(rest, n_random,
                                               derive_rng(self.seed, "random", iteration))

        # 4. reveal
        newly = state.label(selected + report.random_selected)

        # 5-6. inpaint backgrounds and synthesize
        self._synthesize_for(newly, iteration, report)
        return self._finish(report)

    def run(self) -> List[IterationReport]:
        if self.state is None:
            self.bootstrap()
        for iteration in range(1, self.schedule.al_iterations + 1):
            self.run_iteration(iteration)
        self._write_manifest("train_final.json", "final", [])
        logger.info("run finished: %d labeled, %d synthetic",
                    len(self.state.labeled), len(self.state.synthetic))
        return self.reports

    # -- steps ---------------------------------------------------------------

    def _write_manifest(self, name: str, iteration: Any, predict_ids: List[str]) -> Path:
        state = self.state
        train = []
        for image_id in sorted(state.labeled):
            record = self.layout.record(image_id)
            train.append({"id": image_id, "image_path": record.image_path,
                          "mask_path": state.oracle.mask_path(image_id), "kind": "real"})
        for rec in state.synthetic:
            train.append({"id": rec.sample_id, "image_path": rec.image_path,
                          "mask_path": rec.mask_path, "kind": "synthetic"})
        predict = [{"id": i, "image_path": self.layout.record(i).image_path} for i in predict_ids]
        return write_training_manifest(self._path("manifests", name), iteration, self.seed,
                                       self.trainer.committee_size, train, predict)

    def _inpaint(self, image_ids: List[str], report: IterationReport) -> Dict[str, BackgroundImage]:
        """Sequential: each new background joins the pool before the next frame"""
        cfg = self.config.synthesis
        pool = self.state.backgrounds
        before = len(pool)
        out: Dict[str, BackgroundImage] = {}
        for image_id in image_ids:
            sample = self.state.labeled_sample(image_id)
            try:
                out[image_id] = acquire_background(sample, pool, cfg,
                                                   derive_seed(self.seed, "inpaint", image_id))
            except NoBackgroundAvailable as e:
                logger.warning("no background for %s: %s", image_id, e)
                report.failures.append({"id": image_id, "stage": "inpaint", "reason": str(e)})
        report.backgrounds_added = len(pool) - before
        return out

    def _plan(self, image_ids: List[str], inpainted: Dict[str, BackgroundImage],
              report: IterationReport) -> List[_SynthJob]:
        """Draw backgrounds and donors up front, in id order"""
        cfg = self.config.synthesis
        pool = self.state.backgrounds
        labeled = sorted(self.state.labeled)
        jobs: List[_SynthJob] = []
        for position, image_id in enumerate(image_ids):
            frame = self.layout.frame
            for j in range(synthesis_counts(cfg.type1_per_query, position)):
                rng = derive_rng(self.seed, "background", image_id, j)
                # Type-1 needs a background other than the image's own
                if pool.count(frame=frame, exclude_source=image_id) == 0:
                    self._fail(report, image_id, "type1", "no background from another frame in pool")
                    continue
                background = pool.draw(rng, frame=frame, exclude_source=image_id)
                jobs.append(_SynthJob(image_id, SynthType.TYPE1, j, background))
            for j in range(synthesis_counts(cfg.type2_per_query, position)):
                rng = derive_rng(self.seed, "donor", image_id, j)
                donors = [i for i in labeled if i != image_id] or [image_id]
                donor_id = donors[int(rng.integers(len(donors)))]
                background = inpainted.get(image_id)
                if background is None:
                    if cfg.background_inpainting:
                        self._fail(report, image_id, "type2", "original background not recovered")
                        continue
                    if pool.count(frame=frame) == 0:
                        self._fail(report, image_id, "type2", "background pool is empty")
                        continue
                    background = pool.draw(rng, frame=frame)
                jobs.append(_SynthJob(image_id, SynthType.TYPE2, j, background, donor_id))
        return jobs

    @staticmethod
    def _fail(report: IterationReport, image_id: str, stage: str, reason: str):
        logger.warning("skipping %s synthesis for %s: %s", stage, image_id, reason)
        report.failures.append({"id": image_id, "stage": stage, "reason": reason})

    def _run_job(self, job: _SynthJob) -> Tuple[_SynthJob, List[SyntheticSample], Optional[str]]:
        cfg = self.config.synthesis
        instrument_id = job.donor_id or job.image_id
        sample_id = f"{job.image_id}_{job.synth_type.value}_{job.index}"
        seed = derive_seed(self.seed, "synth", job.image_id, job.synth_type.value, job.index)
        try:
            instrument = self.state.labeled_sample(instrument_id)
            if job.synth_type is SynthType.TYPE2 and cfg.multi_blend == 1:
                original = self.state.labeled_sample(job.image_id)
                samples = [generate_type2(original, instrument, self.state.backgrounds, cfg, seed,
                                          sample_id, background=job.background)]
            else:
                samples = synthesize(instrument, job.background, cfg, seed, job.synth_type, sample_id)
        except SynthALError as e:
            return job, [], str(e)
        for sample in samples:
            sample.provenance["source_original_id"] = job.image_id
        return job, samples, None

    def _synthesize_for(self, image_ids: List[str], iteration: int, report: IterationReport):
        cfg = self.config.synthesis
        inpainted = self._inpaint(image_ids, report) if cfg.background_inpainting else {}
        jobs = self._plan(image_ids, inpainted, report)

        if self.workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                results = list(executor.map(self._run_job, jobs))
        else:
            results = [self._run_job(job) for job in jobs]

        records = []
        for job, samples, error in results:
            if error is not None:
                self._fail(report, job.image_id, job.synth_type.value, error)
                continue
            for sample in samples:
                image_path = self._path("synthetic", "images", f"{sample.sample_id}.png")
                mask_path = self._path("synthetic", "masks", f"{sample.sample_id}.png")
                write_image(image_path, sample.image)
                write_mask(mask_path, sample.mask)
                provenance = dict(sample.provenance, iteration=iteration)
                records.append(SyntheticRecord(sample.sample_id, image_path, mask_path, provenance))
        self.state.add_synthetic(records)
        report.synthetic_generated = len(records)
        logger.info("iteration %d: %d synthetic samples from %d images",
                    iteration, len(records), len(image_ids))

    def _finish(self, report: IterationReport) -> IterationReport:
        state = self.state
        tag = self._tag(report.iteration)
        report.labeled = len(state.labeled)
        report.unlabeled = len(state.unlabeled)
        report.synthetic_total = len(state.synthetic)

        write_jsonl(self._path("synthetic", "manifest.jsonl"), [
            {
                "id": r.sample_id,
                "image_path": r.image_path.relative_to(self._path("synthetic")).as_posix(),
                "mask_path": r.mask_path.relative_to(self._path("synthetic")).as_posix(),
                "provenance": r.provenance,
            }
            for r in state.synthetic
        ])
        state.backgrounds.save(self._path("backgrounds"))
        write_json(self._path("pools", f"{tag}.json"), state.snapshot())
        write_json(self._path("reports", f"{tag}.json"), report.to_dict())
        self.reports.append(report)
        return report
