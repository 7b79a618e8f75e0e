import {
  ClusterCard,
  ClusterDetail,
  ClusterPage,
  DeleteResponse,
  ExportResult,
  GroupList,
  Health,
  MergeResponse,
  Stats,
} from "./types";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** The server refused a mutation because our state_version is behind. */
export class ConflictError extends ApiError {
  constructor(readonly expected: number, readonly actual: number) {
    super(409, `stale state: we expected version ${expected}, server is at ${actual}`);
    this.name = "ConflictError";
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    const detail = body?.detail ?? body;
    return typeof detail === "string" ? detail : JSON.stringify(detail);
  } catch {
    return `HTTP ${resp.status}`;
  }
}

export class ApiClient {
  /** baseUrl is "" when the UI is served by the service itself. */
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (resp.status === 409) {
      const body = await resp.json();
      throw new ConflictError(body.detail.expected, body.detail.actual);
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorMessage(resp));
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, payload: unknown, method = "POST"): Promise<T> {
    return this.request<T>(path, {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<Health> {
    return this.request("/healthz");
  }

  listClusters(offset: number, limit: number): Promise<ClusterPage> {
    return this.request(`/api/clusters?offset=${offset}&limit=${limit}`);
  }

  /** Drain the paginated listing; returns the version of the last page. */
  async allClusters(pageSize = 200): Promise<{ version: number; items: ClusterCard[] }> {
    const items: ClusterCard[] = [];
    let version = 0;
    for (let offset = 0; ; offset += pageSize) {
      const page = await this.listClusters(offset, pageSize);
      items.push(...page.items);
      version = page.state_version;
      if (offset + page.items.length >= page.total || page.items.length === 0) {
        break;
      }
    }
    return { version, items };
  }

  clusterDetail(clusterId: string): Promise<ClusterDetail> {
    // cluster ids contain "#", which a raw URL would treat as a fragment
    return this.request(`/api/clusters/${encodeURIComponent(clusterId)}`);
  }

  groups(): Promise<GroupList> {
    return this.request("/api/groups");
  }

  createGroup(
    labelText: string,
    memberClusterIds: string[],
    expectedVersion: number,
  ): Promise<MergeResponse> {
    return this.post("/api/groups", {
      label_text: labelText,
      member_cluster_ids: memberClusterIds,
      expected_state_version: expectedVersion,
    });
  }

  deleteGroup(groupId: string, expectedVersion: number): Promise<DeleteResponse> {
    return this.post(
      `/api/groups/${encodeURIComponent(groupId)}`,
      { expected_state_version: expectedVersion },
      "DELETE",
    );
  }

  stats(): Promise<Stats> {
    return this.request("/api/stats");
  }

  exportLabels(minSupport?: number): Promise<ExportResult> {
    return this.post("/api/export", minSupport === undefined ? {} : { min_support: minSupport });
  }
}
