"""Concurrency control utilities"""
import asyncio
import time
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence

from utils.logger import get_logger


class ConcurrencyLimiter:
    """Runs blocking work on worker threads with a bounded number in flight"""

    def __init__(self, max_concurrent: int = 1):
        """
        Initialize limiter

        Args:
            max_concurrent: Maximum number of tasks running at once (--jobs)
        """
        if max_concurrent < 1:
            raise ValueError(f"max_concurrent must be >= 1, got {max_concurrent}")
        self.max_concurrent = max_concurrent
        self.semaphore = asyncio.Semaphore(max_concurrent)
        self.logger = get_logger(__name__)

    async def run(self, func: Callable, *args, **kwargs) -> Any:
        """
        Run a single task under the limit

        Coroutine functions are awaited directly; plain callables run on a
        worker thread so CPU-bound decoding does not block the event loop.

        Args:
            func: Sync or async callable
            *args, **kwargs: Call arguments

        Returns:
            Task result
        """
        async with self.semaphore:
            if asyncio.iscoroutinefunction(func):
                return await func(*args, **kwargs)
            if self.max_concurrent == 1:
                return func(*args, **kwargs)
            return await asyncio.to_thread(func, *args, **kwargs)

    async def run_batch(
        self,
        func: Callable,
        items: Sequence[Any],
        show_progress: bool = False,
        stats: Optional["TaskStats"] = None,
    ) -> List[Any]:
        """
        Run func over items; results come back in input order

        Args:
            func: Sync or async callable taking one item
            items: Items to process
            show_progress: Log progress after each completion
            stats: Optional stats collector

        Returns:
            Result list aligned with items
        """
        total = len(items)
        completed = 0
        if stats is not None:
            stats.total_tasks += total
            stats.start_time = stats.start_time or time.perf_counter()

        async def run_with_progress(item):
            nonlocal completed
            try:
                result = await self.run(func, item)
            except Exception:
                if stats is not None:
                    stats.failed_tasks += 1
                raise
            completed += 1
            if stats is not None:
                stats.completed_tasks += 1

            if show_progress:
                self.logger.info(f"Progress: {completed}/{total} ({completed/total*100:.1f}%)")

            return result

        try:
            return list(await asyncio.gather(*(run_with_progress(item) for item in items)))
        finally:
            if stats is not None:
                stats.end_time = time.perf_counter()


@dataclass
class TaskStats:
    """Batch statistics"""
    total_tasks: int = 0
    completed_tasks: int = 0
    failed_tasks: int = 0
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    @property
    def duration(self) -> Optional[float]:
        """Elapsed seconds"""
        if self.start_time is not None and self.end_time is not None:
            return self.end_time - self.start_time
        return None

    @property
    def success_rate(self) -> float:
        if self.total_tasks == 0:
            return 0.0
        return self.completed_tasks / self.total_tasks

    def __str__(self):
        duration = self.duration if self.duration is not None else 0.0
        return (
            f"TaskStats(total={self.total_tasks}, "
            f"completed={self.completed_tasks}, "
            f"failed={self.failed_tasks}, "
            f"success_rate={self.success_rate:.2%}, "
            f"duration={duration:.2f}s)"
        )
