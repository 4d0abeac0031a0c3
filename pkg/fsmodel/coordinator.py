"""Coordinator for running fsmodel analyses over several inputs."""

from __future__ import annotations

import asyncio
import logging
from typing import Awaitable, Callable, Dict, List, Optional, Tuple, TypeVar

from .cdl import Depth, TruncatedCompactum, load_compactum, truncate
from .config import RunConfig

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")

Job = Callable[[int, str, TruncatedCompactum], T]


class AnalysisCoordinator:
    """Run one job per input file on worker threads.

    A job gets the input position, the input reference and its truncation.
    Truncations are shared per (input, depth, delta); results come back in input
    order whatever the worker count.
    """

    def __init__(self, config: RunConfig) -> None:
        self._config = config
        self._lock = asyncio.Lock()
        self._semaphore = asyncio.Semaphore(config.workers)
        self._truncations: Dict[Tuple[str, str, str], Awaitable[TruncatedCompactum]] = {}
        self._jobs_done = 0

    @property
    def config(self) -> RunConfig:
        return self._config

    @property
    def workers(self) -> int:
        return self._config.workers

    @property
    def cached_truncations(self) -> int:
        return len(self._truncations)

    @property
    def jobs_done(self) -> int:
        return self._jobs_done

    def _truncate(self, ref: str, depth: Depth) -> TruncatedCompactum:
        spec = load_compactum(ref)
        return truncate(
            spec, depth, self._config.atom_delta, allow_empty=self._config.allow_empty
        )

    async def async_truncation(
        self, ref: str, depth: Optional[Depth] = None
    ) -> TruncatedCompactum:
        depth = depth or self._config.depth
        key = (ref, str(depth), str(self._config.atom_delta))
        async with self._lock:
            pending = self._truncations.get(key)
            if pending is None:
                _LOGGER.debug("Truncating %s at depth %s", ref, depth)
                pending = asyncio.ensure_future(
                    asyncio.to_thread(self._truncate, ref, depth)
                )
                self._truncations[key] = pending
        return await pending

    async def _async_one(self, index: int, ref: str, job: Job) -> T:
        async with self._semaphore:
            t = await self.async_truncation(ref)
            result = await asyncio.to_thread(job, index, ref, t)
        self._jobs_done += 1
        return result

    async def async_run(self, job: Job) -> List[T]:
        results = await asyncio.gather(
            *(
                self._async_one(index, ref, job)
                for index, ref in enumerate(self._config.inputs)
            )
        )
        _LOGGER.debug(
            "Finished %d jobs with %d workers", len(results), self._config.workers
        )
        return list(results)


def run_jobs(config: RunConfig, job: Job) -> List[T]:
    return asyncio.run(AnalysisCoordinator(config).async_run(job))
