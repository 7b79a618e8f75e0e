/** Payload shapes of the curation service HTTP API. */

export interface Health {
  status: string;
  backend: string;
  session_id: string;
  state_version: number;
}

export interface MemberSource {
  report_id: string;
  index: number;
}

export interface ClusterMember {
  surface: string;
  frequency: number;
  /** Present on the detail endpoint only. */
  sources?: MemberSource[];
}

export interface ClusterCard {
  cluster_id: string;
  section: string;
  representative: string;
  size: number;
  frequency: number;
  members: ClusterMember[];
  group_id: string | null;
}

export interface ClusterPage {
  total: number;
  offset: number;
  limit: number;
  state_version: number;
  items: ClusterCard[];
}

export interface ClusterDetail extends ClusterCard {
  state_version: number;
}

export interface Group {
  group_id: string;
  label_text: string;
  cluster_ids: string[];
  image_support: number;
  report_support: number;
  singleton: boolean;
}

export interface GroupList {
  state_version: number;
  items: Group[];
}

export interface MergeResponse {
  state_version: number;
  group: Group;
}

export interface DeleteResponse {
  state_version: number;
  deleted: string;
}

export interface Stats {
  sentences: number;
  unique_sentences: number;
  clusters: number;
  groups: number;
  labels_above_support: number;
  min_support: number;
  state_version: number;
}

export interface ExportResult {
  state_version: number;
  min_support: number;
  labels: number;
  dropped_groups: string[];
  mixed_section_groups: string[];
  images_without_labels: number;
  out_dir: string;
  files: string[];
}
