# All Rights Reserved.
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

import asyncio
import logging
import os

from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


def default_threads():
    return os.cpu_count() or 1


def serve(jobs, threads=None):
    """Evaluate independent jobs concurrently on an individual event loop.

    :param jobs: iterable of zero-argument callables
    :param threads: worker thread count, all cores by default
    :return: job results, in submission order
    """
    jobs = list(jobs)
    if not jobs:
        return []
    threads = threads or default_threads()
    if threads == 1:
        return [job() for job in jobs]

    loop = asyncio.new_event_loop()
    executor = ThreadPoolExecutor(max_workers=threads)

    async def gather():
        futures = [loop.run_in_executor(executor, job) for job in jobs]
        return await asyncio.gather(*futures)

    task = loop.create_task(gather())

    try:
        logger.debug("evaluating %d jobs on %d threads [%s]",
                     len(jobs), threads, os.getpid())
        return loop.run_until_complete(task)
    finally:
        executor.shutdown(wait=True)
        loop.run_until_complete(loop.shutdown_asyncgens())
        loop.close()
