# ruff: noqa
# mypy: ignore-errors
"""
Concurrent runs of two coarse scenarios in worker threads.
"""

import asyncio
from functools import partial

from sphmelt import load_scenario, run_batch, run_scenario, scenario_path

COARSE = {
    "static_droplet": ["numerics.dx=0.18"],
    "migration": ["numerics.dx=0.18"],
}


async def main() -> None:
    print("sphmelt - batch example")
    print("=" * 50)
    jobs = []
    for name, overrides in COARSE.items():
        config = load_scenario(scenario_path(name), overrides)
        jobs.append(partial(run_scenario, config, None, 3))
    results = await run_batch(jobs, limit=2)
    for result in results:
        status = "ok" if result.ok else "diverged"
        print(f"{result.name:<16} {status:<9} steps={result.steps} t={result.time:g}")


if __name__ == "__main__":
    asyncio.run(main())
