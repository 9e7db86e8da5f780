import time

import numpy as np
import orjson
import pytest

from sphmelt.runner import (
    DIAGNOSTICS_NAME,
    THREADS_ENV,
    Simulation,
    run_batch,
    run_scenario,
    step_count,
    thread_count,
)
from sphmelt.scenario import MANIFEST_NAME, load_scenario
from sphmelt.snapshot import read_snapshot_csv


class TestThreadCount:
    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert thread_count() == 3

    def test_invalid_values_fall_back(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        default = thread_count()
        for raw in ("many", "0", " "):
            monkeypatch.setenv(THREADS_ENV, raw)
            assert thread_count() == default


def test_step_count():
    assert step_count(1.0e-3, 1.0e-5) == 100
    assert step_count(1.0e-3, 3.0e-4) == 4
    assert step_count(0.0, 1.0) == 0


class TestSimulation:
    def test_run_writes_outputs(self, droplet_file, tmp_path):
        config = load_scenario(droplet_file, overrides=["output.diagnostics=true"])
        out = tmp_path / "run"
        result = run_scenario(config, out, max_steps=3)
        assert result.ok
        assert result.steps == 3
        assert result.time == pytest.approx(3.0e-5)
        assert (out / MANIFEST_NAME).exists()
        names = [p.name for p in result.snapshots]
        assert names == [
            "snapshot_00000000.csv",
            "snapshot_00000002.csv",
            "snapshot_00000003.csv",
        ]
        lines = (out / DIAGNOSTICS_NAME).read_bytes().splitlines()
        rows = [orjson.loads(line) for line in lines]
        assert [row["step"] for row in rows] == [1, 2, 3]
        assert rows[0]["counters"]["skipped_pairs"] == 0

    def test_snapshot_holds_all_particles(self, droplet_file, tmp_path):
        config = load_scenario(droplet_file)
        simulation = Simulation(config, tmp_path)
        simulation.run(max_steps=1)
        columns = read_snapshot_csv(simulation.snapshots[-1])
        assert len(columns["id"]) == len(simulation.particles)
        assert np.all(np.isfinite(columns["kappa"]))

    def test_observers_see_every_step(self, droplet_file):
        seen = []

        def observer(t, particles, model):
            seen.append(t)

        config = load_scenario(droplet_file)
        result = Simulation(config, observers=[observer]).run(max_steps=2)
        assert result.output_dir is None
        assert result.snapshots == []
        assert seen == pytest.approx([0.0, 1.0e-5, 2.0e-5])


class TestRunBatch:
    @pytest.mark.asyncio
    async def test_keeps_job_order(self):
        def job(value, delay):
            def run():
                time.sleep(delay)
                return value

            return run

        results = await run_batch([job(1, 0.05), job(2, 0.0), job(3, 0.01)], limit=3)
        assert results == [1, 2, 3]

    @pytest.mark.asyncio
    async def test_failure_is_reraised(self):
        def broken():
            raise KeyError("no such scenario")

        with pytest.raises(KeyError, match="no such scenario"):
            await run_batch([lambda: 1, broken], limit=2)

    @pytest.mark.asyncio
    async def test_empty_batch(self):
        assert await run_batch([]) == []
