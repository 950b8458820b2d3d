/** Thin typed client for the interestboard service API.
 *
 * The fetch implementation is injectable so tests can stand in a mock
 * server; network failures surface as thrown errors (never swallowed), HTTP
 * error statuses as ApiError carrying the status code.
 */

import type {
  Ack,
  Judgment,
  Pair,
  SaliencyMapJson,
  Score,
  StatusInfo,
  Storyboard,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getPair(): Promise<Pair> {
    return this.request<Pair>("/api/pair");
  }

  postComparison(judgment: Judgment): Promise<Ack> {
    return this.post<Ack>("/api/comparison", judgment);
  }

  postSkip(a: string, b: string, session: string): Promise<{ ok: boolean }> {
    return this.post<{ ok: boolean }>("/api/skip", { a, b, session });
  }

  recompute(): Promise<{ ok: boolean }> {
    return this.post<{ ok: boolean }>("/api/recompute", {});
  }

  getScores(): Promise<Score[]> {
    return this.request<Score[]>("/api/scores");
  }

  getStoryboard(n: number, d: number, method: string): Promise<Storyboard> {
    const params = new URLSearchParams({
      n: String(n),
      d: String(d),
      method,
    });
    return this.request<Storyboard>(`/api/storyboard?${params}`);
  }

  getSaliency(id: string, windowPx: number, stridePx: number): Promise<SaliencyMapJson> {
    const params = new URLSearchParams({
      window: String(windowPx),
      stride: String(stridePx),
    });
    return this.request<SaliencyMapJson>(
      `/api/saliency/${encodeURIComponent(id)}?${params}`,
    );
  }

  getStatus(): Promise<StatusInfo> {
    return this.request<StatusInfo>("/api/status");
  }
}
