/** Shapes returned by the bundle server. */

export const METRICS = [
  "percent_split2",
  "precision",
  "recall",
  "split_centroid_distance",
  "median_dist_to_centroid",
] as const;

export type MetricName = (typeof METRICS)[number];

export const METRIC_TITLES: Record<MetricName, string> = {
  percent_split2: "Percent of split 2",
  precision: "Precision",
  recall: "Recall",
  split_centroid_distance: "Distance between split centroids",
  median_dist_to_centroid: "Median distance to centroid",
};

export interface Summary {
  n_total: number;
  n_left: number;
  n_right: number;
  frechet_distance: number;
  precision: number;
  recall: number;
  embedding_name: string;
  undefined: string[];
  k_list: number[];
  split_names: [string, string];
  knn_k?: number;
  has_labels?: boolean;
  has_thumbs?: boolean;
}

export interface ClusterRow {
  id: number;
  n_left: number;
  n_right: number;
  percent_split2: number;
  precision: number;
  recall: number;
  split_centroid_distance: number;
  median_dist_to_centroid: number;
  undefined: string[];
  x: number;
  y: number;
}

export interface SampleItem {
  id: string;
  split: string;
  label?: string;
  thumb_url?: string;
  x: number;
  y: number;
}
