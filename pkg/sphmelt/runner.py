"""
Simulation driver and concurrent batches.

``Simulation`` owns one particle set and its model and advances them in fixed
steps, writing snapshots by simulated time. ``run_batch`` executes several
blocking jobs in worker threads.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar, Union

import anyio
import orjson

from sphmelt.integrator import Integrator, SimulationDiverged, StepReport, make_report
from sphmelt.model import ScenarioConfig
from sphmelt.particles import ParticleSet, initialize_particles
from sphmelt.scenario import write_manifest
from sphmelt.snapshot import snapshot_name, write_snapshot
from sphmelt.solver import MeltPoolModel

logger = logging.getLogger(__name__)

T = TypeVar("T")

THREADS_ENV = "SPHMELT_THREADS"
DIAGNOSTICS_NAME = "diagnostics.jsonl"

Observer = Callable[[float, ParticleSet, MeltPoolModel], None]


def thread_count() -> int:
    """Worker thread bound from ``SPHMELT_THREADS``, else the CPU count."""
    default = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return default
    if value < 1:
        logger.warning("Ignoring %s=%r: must be >= 1", THREADS_ENV, raw)
        return default
    return value


def step_count(end_time: float, dt: float) -> int:
    return max(0, math.ceil(end_time / dt - 1.0e-9))


@dataclass
class RunResult:
    name: str
    steps: int
    time: float
    last: StepReport
    snapshots: List[Path] = field(default_factory=list)
    output_dir: Optional[Path] = None
    diverged: Optional[SimulationDiverged] = None

    @property
    def ok(self) -> bool:
        return self.diverged is None


class Simulation:
    """One scenario run: initial state, model, integrator and outputs."""

    def __init__(
        self,
        config: ScenarioConfig,
        output_dir: Optional[Union[str, Path]] = None,
        observers: Sequence[Observer] = (),
    ) -> None:
        self.config = config
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.observers = list(observers)
        self.particles = initialize_particles(config)
        self.model = MeltPoolModel(config)
        self.integrator = Integrator(
            self.particles,
            self.model,
            config.numerics.dt,
            limit=self.model.stable_dt,
        )
        self.snapshots: List[Path] = []
        self._snapshot_step: Optional[int] = None

    @property
    def time(self) -> float:
        return self.integrator.time

    def prime(self) -> None:
        self.integrator.prime()
        self.model.check_time_step(self.particles)

    def snapshot(self) -> List[Path]:
        if self.output_dir is None:
            return []
        written = []
        step = self.integrator.step_index
        fields = self.model.snapshot_fields()
        for fmt in self.config.output.formats:
            path = self.output_dir / snapshot_name(step, fmt)
            written.append(
                write_snapshot(self.particles, self.time, path, fmt, fields=fields)
            )
        self.snapshots.extend(written)
        self._snapshot_step = step
        return written

    def _observe(self) -> None:
        for observer in self.observers:
            observer(self.time, self.particles, self.model)

    def run(self, max_steps: Optional[int] = None) -> RunResult:
        """Advance to ``scenario.end_time`` or ``max_steps``, whichever is first.

        Divergence does not raise: it ends the run and is recorded in the
        result.
        """
        config = self.config
        dt = config.numerics.dt
        total = step_count(config.scenario.end_time, dt)
        if max_steps is not None:
            total = min(total, max_steps)
        interval = config.output.interval
        diagnostics = None
        if self.output_dir is not None:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            write_manifest(config, self.output_dir)
            if config.output.diagnostics:
                diagnostics = (self.output_dir / DIAGNOSTICS_NAME).open("wb")

        logger.info(
            "Running %s: %d particles, %d steps of %g",
            config.scenario.name,
            len(self.particles),
            total,
            dt,
        )
        self.prime()
        self._observe()
        self.snapshot()
        next_output = interval if interval is not None else math.inf
        report = make_report(self.particles, 0, self.time)
        diverged: Optional[SimulationDiverged] = None
        try:
            for _ in range(total):
                try:
                    report = self.integrator.step()
                except SimulationDiverged as exc:
                    diverged = exc
                    report = exc.report
                if diagnostics is not None:
                    diagnostics.write(orjson.dumps(report.as_dict()) + b"\n")
                if diverged is not None:
                    break
                self._observe()
                if self.time >= next_output - 1.0e-9 * dt:
                    self.snapshot()
                    while next_output <= self.time + 1.0e-9 * dt:
                        next_output += interval  # type: ignore[operator]
        finally:
            if diagnostics is not None:
                diagnostics.close()

        if diverged is None:
            if self._snapshot_step != report.step:
                self.snapshot()
            logger.info(
                "Finished %s at t=%g after %d steps",
                config.scenario.name,
                self.time,
                report.step,
            )
        return RunResult(
            name=config.scenario.name,
            steps=report.step,
            time=report.time,
            last=report,
            snapshots=list(self.snapshots),
            output_dir=self.output_dir,
            diverged=diverged,
        )


def run_scenario(
    config: ScenarioConfig,
    output_dir: Optional[Union[str, Path]] = None,
    max_steps: Optional[int] = None,
    observers: Sequence[Observer] = (),
) -> RunResult:
    return Simulation(config, output_dir, observers).run(max_steps)


async def run_batch(
    jobs: Sequence[Callable[[], T]], limit: Optional[int] = None
) -> List[T]:
    """Run blocking jobs in worker threads, at most ``limit`` at a time.

    Results keep the order of ``jobs``. The first failing job cancels the
    rest and its exception is re-raised unwrapped.
    """
    limiter = anyio.CapacityLimiter(limit or thread_count())
    results: Dict[int, Any] = {}

    async def _store_result(key: int, job: Callable[[], T]) -> None:
        results[key] = await anyio.to_thread.run_sync(job, limiter=limiter)

    try:
        async with anyio.create_task_group() as tg:
            for key, job in enumerate(jobs):
                tg.start_soon(_store_result, key, job)
    except Exception as exc:
        if hasattr(exc, "exceptions"):
            for sub_exc in exc.exceptions:
                raise sub_exc from None
        raise
    return [results[key] for key in range(len(jobs))]
