/** Deferred-job polling with cancellation.
 *
 * Long-running solver requests come back as {job_id}; poll() follows them
 * to completion. Each panel keeps one Poller and cancels it when the form
 * changes, so at most one scenario job is in flight per panel.
 */

import { TwinApi, isJobHandle, MaybeJob } from "./api.js";

export class Poller {
  private cancelled = false;

  cancel(): void {
    this.cancelled = true;
  }

  get isCancelled(): boolean {
    return this.cancelled;
  }

  async follow<T>(api: TwinApi, submitted: MaybeJob<T>,
                  intervalMs = 250): Promise<T | null> {
    if (!isJobHandle(submitted)) {
      return submitted as T;
    }
    while (!this.cancelled) {
      const job = await api.job(submitted.job_id);
      if (job.status === "done") {
        return job.result as T;
      }
      if (job.status === "failed") {
        throw new Error(job.error ?? "job failed");
      }
      await sleep(intervalMs);
    }
    return null; // cancelled
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
