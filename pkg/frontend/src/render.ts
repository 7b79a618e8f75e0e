import { sectionNames, Store, visibleClusters } from "./state";
import { ClusterCard, Group } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function statsPanel(store: Store): HTMLElement {
  const wrap = el("div", { id: "stats-panel", class: "stats" });
  const stats = store.state.stats;
  if (!stats) {
    wrap.append(el("span", { class: "muted" }, "no stats yet"));
    return wrap;
  }
  const chain: Array<[string, string, number]> = [
    ["stat-sentences", "sentences", stats.sentences],
    ["stat-unique", "unique", stats.unique_sentences],
    ["stat-clusters", "clusters", stats.clusters],
    ["stat-groups", "groups", stats.groups],
    ["stat-labels", `labels ≥${stats.min_support}`, stats.labels_above_support],
  ];
  chain.forEach(([id, name, value], i) => {
    if (i > 0) {
      wrap.append(el("span", { class: "arrow" }, "→"));
    }
    const cell = el("span", { class: "stat" });
    cell.append(el("b", { id }, String(value)), el("small", {}, name));
    wrap.append(cell);
  });
  if (store.state.statsStale) {
    wrap.append(el("span", { id: "stats-stale", class: "warn" }, "stale"));
  }
  return wrap;
}

function banners(store: Store): HTMLElement {
  const s = store.state;
  const wrap = el("div", { class: "banners" });

  if (s.connection === "error") {
    const banner = el("div", { id: "error-banner", class: "banner error" });
    banner.append(
      el("span", {}, `cannot reach the service: ${s.connectionError}`),
    );
    const retry = el("button", { id: "retry-button" }, "Retry");
    retry.addEventListener("click", () => void store.refresh());
    banner.append(retry);
    wrap.append(banner);
  }

  if (s.conflict) {
    const banner = el("div", { id: "conflict-banner", class: "banner conflict" });
    banner.append(
      el(
        "span",
        {},
        `someone else changed the review state (server at version ${s.conflict.actual}, ` +
          `this view at ${s.conflict.expected}). Nothing was overwritten; refresh to continue.`,
      ),
    );
    const refresh = el("button", { id: "conflict-refresh" }, "Refresh");
    refresh.addEventListener("click", () => void store.refresh());
    banner.append(refresh);
    wrap.append(banner);
  }

  if (s.serverMoved && !s.conflict) {
    const banner = el("div", { id: "stale-banner", class: "banner warn" });
    banner.append(el("span", {}, "server state advanced; this view is stale"));
    const refresh = el("button", { id: "stale-refresh" }, "Refresh");
    refresh.addEventListener("click", () => void store.refresh());
    banner.append(refresh);
    wrap.append(banner);
  }

  if (s.notice) {
    wrap.append(el("div", { id: "notice", class: "banner notice" }, s.notice));
  }
  return wrap;
}

function toolbar(store: Store): HTMLElement {
  const s = store.state;
  const bar = el("div", { class: "toolbar" });

  const sectionSelect = el("select", { id: "section-filter" });
  sectionSelect.append(el("option", { value: "" }, "all sections"));
  for (const name of sectionNames(s)) {
    const opt = el("option", { value: name }, name);
    if (name === s.sectionFilter) {
      opt.selected = true;
    }
    sectionSelect.append(opt);
  }
  sectionSelect.addEventListener("change", () =>
    store.setSectionFilter(sectionSelect.value),
  );

  const search = el("input", {
    id: "search-input",
    type: "search",
    placeholder: "search sentences…",
  });
  search.value = s.searchText;
  search.addEventListener("input", () => store.setSearchText(search.value));

  const label = el("input", {
    id: "label-input",
    type: "text",
    placeholder: "label for merged group",
  });
  label.value = s.labelDraft;
  label.addEventListener("input", () => store.setLabelDraft(label.value));

  const merge = el("button", { id: "merge-button", class: "primary" });
  merge.textContent = `Merge ${s.selection.size || ""} selected`.replace("  ", " ");
  merge.disabled = store.mutationsBlocked();
  merge.addEventListener("click", () => void store.merge());

  const exportBtn = el("button", { id: "export-button" }, "Export");
  exportBtn.disabled = store.mutationsBlocked();
  exportBtn.addEventListener("click", () => void store.runExport());

  bar.append(sectionSelect, search, label, merge, exportBtn);
  return bar;
}

function clusterCard(store: Store, cluster: ClusterCard): HTMLElement {
  const card = el("div", {
    class: "cluster-card" + (cluster.group_id ? " grouped" : ""),
    "data-cluster-id": cluster.cluster_id,
  });

  const head = el("label", { class: "card-head" });
  const check = el("input", {
    type: "checkbox",
    class: "cluster-select",
  });
  check.checked = store.state.selection.has(cluster.cluster_id);
  check.addEventListener("change", () => store.toggleSelect(cluster.cluster_id));
  head.append(
    check,
    el("span", { class: "representative" }, cluster.representative),
    el("span", { class: "tag" }, cluster.section),
    el(
      "span",
      { class: "muted" },
      `${cluster.size} sentence${cluster.size === 1 ? "" : "s"}, seen ${cluster.frequency}×`,
    ),
  );
  if (cluster.group_id) {
    head.append(el("span", { class: "chip" }, cluster.group_id));
  }
  card.append(head);

  // full sentences, never truncated: laterality and severity must stay visible
  const list = el("ul", { class: "members" });
  for (const member of cluster.members) {
    list.append(el("li", {}, `${member.surface} (${member.frequency}×)`));
  }
  card.append(list);
  return card;
}

function groupCard(store: Store, group: Group): HTMLElement {
  const card = el("div", { class: "group-card", "data-group-id": group.group_id });
  const head = el("div", { class: "card-head" });
  head.append(
    el("b", { class: "group-label" }, group.label_text),
    el("span", { class: "muted" }, group.group_id),
    el(
      "span",
      { class: "muted" },
      `${group.cluster_ids.length} clusters, ${group.image_support} images, ` +
        `${group.report_support} reports`,
    ),
  );
  card.append(head);

  const chips = el("div", { class: "chips" });
  for (const cid of group.cluster_ids) {
    chips.append(el("span", { class: "chip" }, cid));
  }
  card.append(chips);

  const actions = el("div", { class: "actions" });
  const renameInput = el("input", { type: "text", class: "rename-input" });
  renameInput.value = group.label_text;
  const renameBtn = el("button", { class: "rename-button" }, "Rename");
  renameBtn.disabled = store.mutationsBlocked();
  renameBtn.addEventListener("click", () =>
    void store.renameGroup(group, renameInput.value),
  );
  const deleteBtn = el("button", { class: "delete-button" }, "Delete");
  deleteBtn.disabled = store.mutationsBlocked();
  deleteBtn.addEventListener("click", () => void store.removeGroup(group.group_id));
  actions.append(renameInput, renameBtn, deleteBtn);
  card.append(actions);
  return card;
}

function exportSummary(store: Store): HTMLElement | null {
  const result = store.state.exportResult;
  if (!result) {
    return null;
  }
  const box = el("div", { id: "export-result", class: "export-result" });
  box.append(
    el(
      "span",
      {},
      `exported ${result.labels} labels (min support ${result.min_support}) to ${result.out_dir}`,
    ),
  );
  if (result.dropped_groups.length) {
    box.append(
      el("span", { class: "muted" }, `dropped: ${result.dropped_groups.join(", ")}`),
    );
  }
  return box;
}

export function render(root: HTMLElement, store: Store): void {
  const s = store.state;
  root.textContent = "";

  const header = el("header", {});
  header.append(el("h1", {}, "labelforge review"));
  header.append(
    el(
      "span",
      { id: "connection-badge", class: `badge ${s.connection}` },
      s.connection,
    ),
  );
  header.append(statsPanel(store));
  root.append(header, banners(store));

  if (s.connection === "loading") {
    root.append(el("p", { class: "muted" }, "loading…"));
    return;
  }
  if (s.connection === "error") {
    return;
  }

  root.append(toolbar(store));

  const main = el("div", { class: "columns" });

  const clustersCol = el("section", { id: "cluster-list" });
  const visible = visibleClusters(s);
  if (s.clusters.length === 0) {
    clustersCol.append(
      el("div", { id: "empty-state", class: "empty" }, "no clusters loaded; run the pipeline first"),
    );
  } else if (visible.length === 0) {
    clustersCol.append(el("div", { class: "empty" }, "nothing matches the current filter"));
  } else {
    for (const cluster of visible) {
      clustersCol.append(clusterCard(store, cluster));
    }
  }

  const groupsCol = el("section", { id: "groups-list" });
  groupsCol.append(el("h2", {}, `groups (${s.groups.length})`));
  for (const group of s.groups) {
    groupsCol.append(groupCard(store, group));
  }

  main.append(clustersCol, groupsCol);
  root.append(main);

  const summary = exportSummary(store);
  if (summary) {
    root.append(summary);
  }
}
