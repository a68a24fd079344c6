import type {
  ApiEvent,
  CorrectionInterval,
  CorrectionRequest,
  StatusSnapshot,
} from "./types.ts";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function checkJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

/** Split a byte stream into parsed NDJSON records. */
export async function* ndjson(
  stream: ReadableStream<Uint8Array>,
): AsyncGenerator<unknown> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let newline;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        if (line) yield JSON.parse(line);
      }
    }
    const tail = buffer.trim();
    if (tail) yield JSON.parse(tail);
  } finally {
    reader.releaseLock();
  }
}

export interface StreamCallbacks {
  onEvent: (event: ApiEvent) => void;
  onConnect?: () => void;
  onDisconnect?: (error: unknown) => void;
}

export class ApiClient {
  constructor(public base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  status(): Promise<StatusSnapshot> {
    return fetch(this.url("/status")).then((r) => checkJson<StatusSnapshot>(r));
  }

  control(
    cmd: string,
    args: { t_ms?: number; speed?: number; variant?: string } = {},
  ): Promise<StatusSnapshot> {
    return fetch(this.url("/control"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ cmd, ...args }),
    }).then((r) => checkJson<StatusSnapshot>(r));
  }

  correct(
    params: CorrectionRequest,
  ): Promise<{ path_id: string; intervals: CorrectionInterval[] }> {
    return fetch(this.url("/pipeline/correct"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    }).then((r) => checkJson(r));
  }

  async scenarioCsv(pathId?: string): Promise<string> {
    const query = pathId ? `?path_id=${encodeURIComponent(pathId)}` : "";
    const resp = await fetch(this.url(`/scenario${query}`));
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.text();
  }

  /**
   * Consume the NDJSON event stream, reconnecting with exponential backoff
   * (0.5 s doubling to 5 s) until the signal aborts.  A stream that ends
   * normally (replay finished) also reconnects, so a restarted replay is
   * picked up without a reload.
   */
  async streamEvents(
    callbacks: StreamCallbacks,
    options: { kinds?: string[]; pathId?: string; signal?: AbortSignal } = {},
  ): Promise<void> {
    const params = new URLSearchParams();
    if (options.kinds?.length) params.set("kinds", options.kinds.join(","));
    if (options.pathId) params.set("path_id", options.pathId);
    const query = params.size ? `?${params}` : "";
    let backoff = 500;
    for (;;) {
      if (options.signal?.aborted) return;
      try {
        const resp = await fetch(this.url(`/events${query}`), {
          signal: options.signal,
        });
        if (!resp.ok || !resp.body) {
          throw new ApiError(resp.status, resp.statusText);
        }
        callbacks.onConnect?.();
        backoff = 500;
        for await (const record of ndjson(resp.body)) {
          callbacks.onEvent(record as ApiEvent);
        }
        callbacks.onDisconnect?.(null);
      } catch (error) {
        if (options.signal?.aborted) return;
        callbacks.onDisconnect?.(error);
      }
      await new Promise((resolve) => setTimeout(resolve, backoff));
      backoff = Math.min(backoff * 2, 5000);
    }
  }
}
