import { ApiClient, ApiError, ConflictError } from "./api";
import { ClusterCard, ExportResult, Group, Stats } from "./types";

export type Connection = "loading" | "ready" | "error";

export interface Conflict {
  expected: number;
  actual: number;
}

export interface AppState {
  connection: Connection;
  connectionError: string;
  /** Server state_version as of the last full load. */
  version: number;
  clusters: ClusterCard[];
  groups: Group[];
  stats: Stats | null;
  statsStale: boolean;
  selection: Set<string>;
  sectionFilter: string;
  searchText: string;
  labelDraft: string;
  /** Set when the server reported our version stale; cleared by refresh(). */
  conflict: Conflict | null;
  /** Set when background polling sees the server version advance. */
  serverMoved: boolean;
  notice: string;
  busy: boolean;
  exportResult: ExportResult | null;
}

function initialState(): AppState {
  return {
    connection: "loading",
    connectionError: "",
    version: 0,
    clusters: [],
    groups: [],
    stats: null,
    statsStale: false,
    selection: new Set(),
    sectionFilter: "",
    searchText: "",
    labelDraft: "",
    conflict: null,
    serverMoved: false,
    notice: "",
    busy: false,
    exportResult: null,
  };
}

/** Case-insensitive substring match over representative and member surfaces. */
export function clusterMatches(cluster: ClusterCard, query: string): boolean {
  const needle = query.trim().toLowerCase();
  if (!needle) {
    return true;
  }
  if (cluster.representative.toLowerCase().includes(needle)) {
    return true;
  }
  return cluster.members.some((m) => m.surface.toLowerCase().includes(needle));
}

export function visibleClusters(state: AppState): ClusterCard[] {
  return state.clusters.filter(
    (c) =>
      (!state.sectionFilter || c.section === state.sectionFilter) &&
      clusterMatches(c, state.searchText),
  );
}

export function sectionNames(state: AppState): string[] {
  const seen: string[] = [];
  for (const c of state.clusters) {
    if (!seen.includes(c.section)) {
      seen.push(c.section);
    }
  }
  return seen;
}

type Listener = () => void;

/**
 * All server interaction funnels through here. Decisions render only after
 * the server acknowledged them: every mutation re-fetches the full state,
 * and a version conflict freezes mutations until the user refreshes.
 */
export class Store {
  readonly state: AppState = initialState();
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) {
      fn();
    }
  }

  mutationsBlocked(): boolean {
    return this.state.conflict !== null || this.state.busy;
  }

  async load(): Promise<void> {
    const s = this.state;
    try {
      const [clusters, groups, stats] = await Promise.all([
        this.api.allClusters(),
        this.api.groups(),
        this.api.stats(),
      ]);
      s.clusters = clusters.items;
      s.groups = groups.items;
      s.stats = stats;
      s.statsStale = false;
      s.version = groups.state_version;
      s.connection = "ready";
      s.connectionError = "";
      s.conflict = null;
      s.serverMoved = false;
      // drop selected ids that no longer exist; grouped clusters stay
      // selectable so a later merge can supersede their assignment
      const known = new Set(s.clusters.map((c) => c.cluster_id));
      s.selection = new Set([...s.selection].filter((id) => known.has(id)));
    } catch (err) {
      s.connection = "error";
      s.connectionError = err instanceof Error ? err.message : String(err);
    }
    this.emit();
  }

  /** User-initiated recovery from conflict, stale view, or connection loss. */
  async refresh(): Promise<void> {
    this.state.connection = "loading";
    this.state.notice = "";
    this.emit();
    await this.load();
  }

  toggleSelect(clusterId: string): void {
    const sel = this.state.selection;
    if (sel.has(clusterId)) {
      sel.delete(clusterId);
    } else {
      sel.add(clusterId);
    }
    this.emit();
  }

  setSectionFilter(section: string): void {
    this.state.sectionFilter = section;
    this.emit();
  }

  setSearchText(text: string): void {
    this.state.searchText = text;
    this.emit();
  }

  setLabelDraft(text: string): void {
    // no emit: typing must not rebuild the DOM under the caret
    this.state.labelDraft = text;
  }

  /** Poll hook: flag the view stale when the server version advances. */
  async checkServerVersion(): Promise<void> {
    if (this.state.connection !== "ready") {
      return;
    }
    try {
      const health = await this.api.health();
      if (health.state_version !== this.state.version && !this.state.serverMoved) {
        this.state.serverMoved = true;
        this.emit();
      }
    } catch {
      // transient; the next mutation or refresh will surface real errors
    }
  }

  private async mutate(run: () => Promise<void>): Promise<void> {
    const s = this.state;
    if (s.conflict) {
      s.notice = "resolve the version conflict first";
      this.emit();
      return;
    }
    if (s.busy) {
      return;
    }
    s.busy = true;
    s.notice = "";
    this.emit();
    try {
      await run();
      s.busy = false;
      await this.load();
    } catch (err) {
      s.busy = false;
      if (err instanceof ConflictError) {
        // never overwrite silently: freeze and ask the user to refresh
        s.conflict = { expected: err.expected, actual: err.actual };
      } else if (err instanceof ApiError) {
        s.notice = err.message;
      } else {
        s.notice = String(err);
      }
      this.emit();
    }
  }

  async merge(): Promise<void> {
    const s = this.state;
    const label = s.labelDraft.trim();
    if (s.selection.size === 0) {
      s.notice = "select at least one cluster to merge";
      this.emit();
      return;
    }
    if (!label) {
      s.notice = "label text must not be empty";
      this.emit();
      return;
    }
    const members = [...s.selection].sort();
    await this.mutate(async () => {
      await this.api.createGroup(label, members, s.version);
      s.labelDraft = "";
      s.selection = new Set();
    });
  }

  async removeGroup(groupId: string): Promise<void> {
    await this.mutate(async () => {
      await this.api.deleteGroup(groupId, this.state.version);
    });
  }

  /** Rename = re-merge the same members under the new label; the old group
   * empties out and disappears, the log keeps both decisions. */
  async renameGroup(group: Group, newLabel: string): Promise<void> {
    const label = newLabel.trim();
    if (!label) {
      this.state.notice = "label text must not be empty";
      this.emit();
      return;
    }
    if (label === group.label_text) {
      return;
    }
    await this.mutate(async () => {
      await this.api.createGroup(label, group.cluster_ids, this.state.version);
    });
  }

  async runExport(): Promise<void> {
    await this.mutate(async () => {
      this.state.exportResult = await this.api.exportLabels();
    });
  }
}
