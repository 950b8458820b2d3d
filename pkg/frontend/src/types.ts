/** Payload shapes of the interestboard service API. */

export interface ImageRef {
  id: string;
  path: string;
}

export interface Pair {
  a: ImageRef;
  b: ImageRef;
}

export interface Judgment {
  winner: string;
  loser: string;
  session: string;
  ref: string;
}

export interface Ack {
  ok: boolean;
  log_length: number;
}

export interface Score {
  id: string;
  mean: number;
  variance: number;
}

export interface StoryboardImage {
  id: string;
  path: string;
  score: number;
  capture_index: number;
}

export interface Storyboard {
  method: string;
  complete: boolean;
  images: StoryboardImage[];
}

export interface OcclusionConfig {
  window_px: number;
  stride_px: number;
  image_size_px: number;
  blank_value: number;
}

export interface SaliencyMapJson {
  rows: number;
  cols: number;
  base_interest: number;
  deltas: number[][];
  config: OcclusionConfig;
}

export interface StatusInfo {
  recompute: { state: string; reason?: string };
  log_length: number;
  covered_prefix: number;
  n_images: number;
  scores_available: boolean;
}
