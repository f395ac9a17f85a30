/** Thin typed client over the bundle server. */

import type { ClusterRow, SampleItem, Summary } from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(public status: number, url: string) {
    super(`${status} from ${url}`);
  }
}

export class Api {
  constructor(
    private fetchFn: FetchLike = (url) => fetch(url),
    private base = "",
  ) {}

  private async get<T>(path: string): Promise<T> {
    const url = this.base + path;
    const resp = await this.fetchFn(url);
    if (!resp.ok) throw new ApiError(resp.status, url);
    return (await resp.json()) as T;
  }

  summary(): Promise<Summary> {
    return this.get("/api/summary");
  }

  clusters(k: number): Promise<ClusterRow[]> {
    return this.get(`/api/clusters?k=${k}`);
  }

  samples(k: number, cid: number): Promise<SampleItem[]> {
    return this.get(`/api/clusters/${k}/${cid}/samples`);
  }

  labels(q: string): Promise<string[]> {
    return this.get(`/api/labels?q=${encodeURIComponent(q)}`);
  }

  labelClusters(k: number, classes: string[]): Promise<number[]> {
    const joined = classes.map(encodeURIComponent).join(",");
    return this.get(`/api/label-clusters?k=${k}&classes=${joined}`);
  }
}
